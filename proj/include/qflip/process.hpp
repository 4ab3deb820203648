#pragma once

#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qflip/interval.hpp"
#include "qflip/rational.hpp"

namespace qflip {

struct InvalidBias : std::domain_error {
    using std::domain_error::domain_error;
};
struct InvalidBreakpoint : std::domain_error {
    using std::domain_error::domain_error;
};
struct OutOfDomain : std::domain_error {
    using std::domain_error::domain_error;
};
struct PieceExplosion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One branch of a recurrence E(q) = a + r·E(f(q)): an interval of the unit
// domain together with the affine rescaling map f, the continuation weight r
// and the additive term a that apply there.
struct Piece {
    Interval iv;
    AffineFn f;
    Rational r;
    Rational a;
};

// E(q) = a(q) + r(q)·E(f(q)) as a finite list of interval pieces partitioning
// [0,1].  Immutable after construction; all operations on it are pure.
struct PiecewiseRecurrence {
    std::vector<Piece> pieces;  // ordered by interval
    Rational p;                 // bias parameter (metadata)
    std::string label;

    std::size_t piece_index(const Rational& q) const {
        if (q < 0 || q > 1) throw OutOfDomain("q outside [0,1]: " + rat_str(q));
        for (std::size_t i = 0; i < pieces.size(); ++i)
            if (pieces[i].iv.contains(q)) return i;
        throw OutOfDomain("no piece contains q = " + rat_str(q) + " (invalid partition?)");
    }

    const Piece& piece_at(const Rational& q) const { return pieces[piece_index(q)]; }

    Rational max_r() const {
        Rational m = 0;
        for (auto& pc : pieces)
            if (pc.r > m) m = pc.r;
        return m;
    }

    Rational sup_a() const {
        Rational m = 0;
        for (auto& pc : pieces)
            if (pc.a > m) m = pc.a;
        return m;
    }

    // Piece boundaries strictly inside (0,1); candidate discontinuity sites.
    std::vector<Rational> interior_breakpoints() const {
        std::vector<Rational> bps;
        for (auto& pc : pieces) {
            for (const Rational& x : {pc.iv.lo, pc.iv.hi})
                if (x > 0 && x < 1) bps.push_back(x);
        }
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
        return bps;
    }
};

enum class Family { H0, E0, E1, E2, E3 };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::H0: return "H0";
        case Family::E0: return "E0";
        case Family::E1: return "E1";
        case Family::E2: return "E2";
        case Family::E3: return "E3";
    }
    return "?";
}

inline std::optional<Family> family_from_name(const std::string& s) {
    for (Family f : {Family::H0, Family::E0, Family::E1, Family::E2, Family::E3})
        if (family_name(f) == s) return f;
    return std::nullopt;
}

// The default breakpoint for the E3 strategy: max((1-p)^2, 1-(1-p)^2).
// Only meaningful when p <= (1-p)^2.
inline Rational e3_default_breakpoint(const Rational& p) {
    Rational s = (1 - p) * (1 - p);
    Rational t = 1 - s;
    return std::max(s, t);
}

// Builds one of the five built-in processes.  The pieces transcribe the
// defining case splits verbatim, including which side owns each breakpoint.
// `c` is only consulted for E3; E2 is fixed at breakpoint 1/2.
inline PiecewiseRecurrence make_builtin(Family family, const Rational& p,
                                        std::optional<Rational> c = std::nullopt) {
    if (!(p > 0 && p <= Rational(1, 2)))
        throw InvalidBias("bias p must satisfy 0 < p <= 1/2, got " + rat_str(p));

    const Rational one(1), zero(0);
    const Rational q1p = 1 - p;
    // rescaling maps
    const AffineFn low{1 / p, zero};                // q/p
    const AffineFn mid{1 / q1p, -p / q1p};          // (q-p)/(1-p)
    const AffineFn high{1 / p, -(q1p) / p};         // (q-(1-p))/p
    const AffineFn stretch{1 / q1p, zero};          // q/(1-p)

    PiecewiseRecurrence rec;
    rec.p = p;
    rec.label = family_name(family) + "@p=" + rat_str(p);

    auto add = [&](Interval iv, AffineFn f, Rational r, Rational a) {
        if (!iv.empty()) rec.pieces.push_back({std::move(iv), f, std::move(r), std::move(a)});
    };

    switch (family) {
        case Family::H0:
            // H(q) = p·H(q/p) on q <= p;  H(q) = p + (1-p)·H((q-p)/(1-p)) on q > p
            add({zero, p, true, true}, low, p, zero);
            add({p, one, false, true}, mid, q1p, p);
            break;
        case Family::E0:
            add({zero, p, true, true}, low, p, one);
            add({p, one, false, true}, mid, q1p, one);
            break;
        case Family::E1:
            if (p == Rational(1, 2))
                throw InvalidBias("E1 needs p < 1/2 (the middle region is empty at p = 1/2)");
            add({zero, p, true, true}, low, p, one);
            add({p, q1p, false, false}, mid, q1p, one);
            add({q1p, one, true, true}, high, p, one);
            break;
        case Family::E2:
            if (p == Rational(1, 2))
                throw InvalidBias("E2 needs p < 1/2 (the middle regions are empty at p = 1/2)");
            add({zero, p, true, true}, low, p, one);
            add({p, Rational(1, 2), false, true}, mid, q1p, one);
            add({Rational(1, 2), q1p, false, false}, stretch, q1p, one);
            add({q1p, one, true, true}, high, p, one);
            break;
        case Family::E3: {
            if (p == Rational(1, 2))
                throw InvalidBias("E3 needs p < 1/2");
            Rational cmin = e3_default_breakpoint(p);
            Rational cc;
            if (c.has_value()) {
                cc = *c;
                if (cc < cmin || cc > q1p)
                    throw InvalidBreakpoint("E3 breakpoint must satisfy max((1-p)^2, 1-(1-p)^2) <= c <= 1-p; got c = " +
                                            rat_str(cc));
            } else {
                if (p > (1 - p) * (1 - p))
                    throw InvalidBreakpoint("E3 requires p <= (1-p)^2; got p = " + rat_str(p));
                cc = cmin;
            }
            add({zero, p, true, true}, low, p, one);
            add({p, cc, false, true}, mid, q1p, one);
            add({cc, q1p, false, false}, stretch, q1p, one);
            add({q1p, one, true, true}, high, p, one);
            rec.label = "E3@p=" + rat_str(p) + ",c=" + rat_str(cc);
            break;
        }
    }
    return rec;
}

struct MapValue {
    Rational f, r, a;
    std::size_t piece;
};

// Selects the unique piece containing q and evaluates its map exactly.
inline MapValue eval_map(const PiecewiseRecurrence& rec, const Rational& q) {
    std::size_t i = rec.piece_index(q);
    const Piece& pc = rec.pieces[i];
    return {pc.f(q), pc.r, pc.a, i};
}

// Structural check: pieces partition [0,1], images stay in [0,1],
// weights in (0,1), additive terms nonnegative.  Violations are returned,
// not thrown.
inline std::vector<std::string> validate(const PiecewiseRecurrence& rec) {
    std::vector<std::string> out;
    if (rec.pieces.empty()) {
        out.push_back("no pieces");
        return out;
    }
    auto sorted = rec.pieces;
    std::sort(sorted.begin(), sorted.end(), [](const Piece& a, const Piece& b) {
        if (a.iv.lo != b.iv.lo) return a.iv.lo < b.iv.lo;
        return a.iv.lo_closed && !b.iv.lo_closed;
    });
    if (!(sorted.front().iv.lo == 0 && sorted.front().iv.lo_closed))
        out.push_back("partition does not start closed at 0");
    if (!(sorted.back().iv.hi == 1 && sorted.back().iv.hi_closed))
        out.push_back("partition does not end closed at 1");
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const Interval& cur = sorted[i].iv;
        const Interval& nxt = sorted[i + 1].iv;
        if (cur.hi != nxt.lo)
            out.push_back("gap or overlap between " + cur.str() + " and " + nxt.str());
        else if (cur.hi_closed == nxt.lo_closed)
            out.push_back(cur.hi_closed
                              ? "overlap at q = " + rat_str(cur.hi) + " (both pieces closed)"
                              : "gap at q = " + rat_str(cur.hi) + " (both pieces open)");
    }
    for (auto& pc : rec.pieces) {
        if (pc.iv.empty()) out.push_back("empty piece " + pc.iv.str());
        if (pc.iv.lo < 0 || pc.iv.hi > 1) out.push_back("piece outside [0,1]: " + pc.iv.str());
        if (!(pc.r > 0 && pc.r < 1))
            out.push_back("weight outside (0,1): r = " + rat_str(pc.r) + " on " + pc.iv.str());
        if (pc.a < 0) out.push_back("negative additive term on " + pc.iv.str());
        Interval img = pc.f.image(pc.iv);
        if (img.lo < 0 || img.hi > 1)
            out.push_back("image of " + pc.iv.str() + " escapes [0,1]: " + img.str());
    }
    return out;
}

namespace detail {
template <class T>
T scalar_cast(const Rational& x) {
    if constexpr (std::is_same_v<T, Rational>)
        return x;
    else
        return x.convert_to<T>();
}
}  // namespace detail

// One application of the recurrence operator: τ(g)(q) = a(q) + r(q)·g(f(q)).
// Exact when the oracle g returns Rational.
template <class G>
auto tau_apply(const PiecewiseRecurrence& rec, G&& g, const Rational& q) {
    using Raw = std::decay_t<decltype(g(std::declval<Rational>()))>;
    // collapse multiprecision expression templates back to Rational
    using V = std::conditional_t<std::is_arithmetic_v<Raw>, Raw, Rational>;
    MapValue m = eval_map(rec, q);
    return detail::scalar_cast<V>(m.a) + detail::scalar_cast<V>(m.r) * g(m.f);
}

inline std::size_t default_piece_limit() {
    if (const char* env = std::getenv("QFLIP_PIECE_LIMIT")) {
        long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 100000;
}

// The n-step operator τⁿ as a recurrence of its own: refined pieces, map fⁿ,
// weight ∏ r(f^i(q)), additive term the n-term partial sum.
inline PiecewiseRecurrence unwind(const PiecewiseRecurrence& rec, std::size_t n,
                                  std::size_t piece_limit = default_piece_limit()) {
    if (n < 1) throw std::invalid_argument("unwind needs n >= 1");
    PiecewiseRecurrence acc = rec;
    for (std::size_t step = 1; step < n; ++step) {
        std::vector<Piece> next;
        for (const Piece& cur : acc.pieces) {
            Interval img = cur.f.image(cur.iv);
            for (const Piece& base : rec.pieces) {
                Interval hit = img.intersect(base.iv);
                if (hit.empty()) continue;
                Interval sub = cur.f.slope == 0 ? cur.iv : cur.f.preimage(hit).intersect(cur.iv);
                if (sub.empty()) continue;
                next.push_back({sub, base.f.after(cur.f), cur.r * base.r, cur.a + cur.r * base.a});
                if (next.size() > piece_limit)
                    throw PieceExplosion("unwind exceeded piece limit of " + std::to_string(piece_limit));
            }
        }
        std::sort(next.begin(), next.end(), [](const Piece& a, const Piece& b) {
            if (a.iv.lo != b.iv.lo) return a.iv.lo < b.iv.lo;
            return a.iv.lo_closed && !b.iv.lo_closed;
        });
        acc.pieces = std::move(next);
    }
    acc.label = rec.label + "^" + std::to_string(n);
    return acc;
}

}  // namespace qflip
