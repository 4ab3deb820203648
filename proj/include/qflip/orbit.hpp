#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qflip/process.hpp"

namespace qflip {

struct NoCycleFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ForcedConflict : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotEigenApplicable : std::domain_error {
    using std::domain_error::domain_error;
};
struct DivergentWeight : std::logic_error {
    using std::logic_error::logic_error;
};

enum class ComponentClass { Rational, NoCycleWithinBudget };

// The exact forward trajectory q, f(q), f²(q), …  When a point repeats the
// trace stops; the repeated point is kept at the end, so
// points[cycle_entry] == points.back() exactly.
struct OrbitReport {
    std::vector<Rational> points;
    std::optional<std::size_t> cycle_entry;
    std::optional<std::size_t> cycle_length;
    ComponentClass classification = ComponentClass::NoCycleWithinBudget;
};

constexpr std::size_t kDefaultOrbitBudget = 10000;

inline OrbitReport orbit_trace(const PiecewiseRecurrence& rec, const Rational& q,
                               std::size_t max_steps = kDefaultOrbitBudget) {
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    OrbitReport rep;
    std::map<Rational, std::size_t> seen;  // exact-equality membership
    Rational cur = q;
    for (std::size_t step = 0; step <= max_steps; ++step) {
        auto it = seen.find(cur);
        rep.points.push_back(cur);
        if (it != seen.end()) {
            rep.cycle_entry = it->second;
            rep.cycle_length = rep.points.size() - 1 - it->second;
            rep.classification = ComponentClass::Rational;
            return rep;
        }
        if (step == max_steps) break;
        seen.emplace(cur, step);
        cur = eval_map(rec, cur).f;
    }
    return rep;
}

struct ForcedValue {
    Rational at;
    Rational value;
    std::size_t cycle_entry = 0;
    std::size_t cycle_length = 0;
};

// Exact solution value at a point whose orbit reaches a cycle: solve the
// cycle by k-step unwinding, then back-propagate E(q) = a + r·E(f(q)) along
// the pre-cycle prefix.
inline ForcedValue forced_value(const PiecewiseRecurrence& rec, const Rational& q,
                                std::size_t max_steps = kDefaultOrbitBudget) {
    OrbitReport orb = orbit_trace(rec, q, max_steps);
    if (orb.classification != ComponentClass::Rational)
        throw NoCycleFound("no cycle within " + std::to_string(max_steps) + " steps from q = " + rat_str(q));
    std::size_t m = *orb.cycle_entry, k = *orb.cycle_length;

    // value on the cycle entry: E = A / (1 - W) with
    // A = Σ_{n<k} a(f^n)·∏_{i<n} r(f^i), W = ∏_{i<k} r(f^i)
    Rational A = 0, W = 1;
    for (std::size_t i = 0; i < k; ++i) {
        MapValue mv = eval_map(rec, orb.points[m + i]);
        A += W * mv.a;
        W *= mv.r;
    }
    if (W >= 1) throw DivergentWeight("cycle weight product >= 1 on a (supposedly) valid recurrence");
    Rational value = A / (1 - W);

    // back-propagate to q along the prefix
    for (std::size_t i = m; i-- > 0;) {
        MapValue mv = eval_map(rec, orb.points[i]);
        value = mv.a + mv.r * value;
    }
    return {q, value, m, k};
}

// All x in [0,1] with f(x) = y, by inverting each affine branch and keeping
// in-domain roots.  Pieces with constant maps are not invertible pointwise
// and are rejected.
inline std::vector<Rational> preimages(const PiecewiseRecurrence& rec, const Rational& y) {
    if (y < 0 || y > 1) throw OutOfDomain("preimage target outside [0,1]: " + rat_str(y));
    std::vector<Rational> out;
    for (const Piece& pc : rec.pieces) {
        if (pc.f.slope == 0)
            throw std::invalid_argument("preimages: piece with constant map is not supported");
        Rational x = pc.f.invert(y);
        if (pc.iv.contains(x)) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Samples of an eigenfunction of the weight operator R(E) = r·E∘f at
// eigenvalue 1-p, built over the preimage tree of the fixed point 1:
// E(1) = 1 and E(q) = r(q)·E(f(q))/(1-p) one preimage generation at a time.
//
// The defining identity r(q)·E(f(q)) = (1-p)·E(q) holds at every tree node
// except the anchor q = 1 itself, where r(1) = p: the anchor pins the scale
// but is not an identity witness.  Depth 0 returns just the anchor; depth
// d >= 1 returns the non-anchor nodes within d preimage generations.
inline std::vector<std::pair<Rational, Rational>> eigenfunction_samples(
    const PiecewiseRecurrence& rec, std::size_t depth) {
    Rational one(1);
    MapValue at1 = eval_map(rec, one);
    if (at1.f != 1) throw NotEigenApplicable("1 is not a fixed point of f");
    Rational lambda = 1 - rec.p;

    std::vector<std::pair<Rational, Rational>> out;
    if (depth == 0) {
        out.emplace_back(one, one);
        return out;
    }
    std::map<Rational, Rational> values;  // q -> E(q)
    values.emplace(one, one);
    std::vector<Rational> frontier{one};
    for (std::size_t d = 0; d < depth; ++d) {
        std::vector<Rational> next;
        for (const Rational& y : frontier) {
            for (const Rational& x : preimages(rec, y)) {
                if (values.count(x)) continue;
                Rational ex = eval_map(rec, x).r * values.at(y) / lambda;
                values.emplace(x, ex);
                next.push_back(x);
                out.emplace_back(x, ex);
            }
        }
        frontier = std::move(next);
    }
    return out;
}

// Forward extension of a solution from a freely chosen value: E(q0) = v0 and
// E(f(q)) = (E(q) - a(q))/r(q) along the orbit.  Only consistent on acyclic
// stretches; hitting a cycle forces the value and any mismatch is an error.
inline std::vector<std::pair<Rational, Rational>> extend_unbounded(
    const PiecewiseRecurrence& rec, const Rational& q0, const Rational& v0, std::size_t depth) {
    OrbitReport orb = orbit_trace(rec, q0, depth);
    if (orb.classification == ComponentClass::Rational) {
        Rational forced = forced_value(rec, q0, depth).value;
        if (forced != v0)
            throw ForcedConflict("orbit of " + rat_str(q0) + " reaches a cycle; value is forced to " +
                                 rat_str(forced) + ", not " + rat_str(v0));
    }
    std::vector<std::pair<Rational, Rational>> out;
    Rational v = v0;
    std::size_t n = std::min(orb.points.size(), depth + 1);
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(orb.points[i], v);
        if (i + 1 < n) {
            MapValue mv = eval_map(rec, orb.points[i]);
            v = (v - mv.a) / mv.r;
        }
    }
    return out;
}

}  // namespace qflip
