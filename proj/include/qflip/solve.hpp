#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "qflip/orbit.hpp"
#include "qflip/process.hpp"

namespace qflip {

// An exact rational enclosure [lower, upper] of the unique bounded fixpoint
// value E*(q).  `exact` marks enclosures collapsed to the forced value of a
// cycle-reaching orbit.
struct CertifiedValue {
    Rational lower, upper;
    std::size_t terms_used = 0;
    bool exact = false;

    Rational width() const { return upper - lower; }
    Rational midpoint() const { return (lower + upper) / 2; }
};

// Upper bound on the operator norm, hence on the spectral radius, of the
// weight operator R(E) = r·E∘f: the largest continuation weight.
inline Rational spectral_bound(const PiecewiseRecurrence& rec) { return rec.max_r(); }

namespace detail {

// Partial sum of the orbit series with the geometric tail envelope:
//   lower = Σ_{n<N} a(fⁿq)·∏_{i<n} r(f^i q),  tail <= sup_a·w_N/(1-c_max).
// Stops when the tail bound drops to eps, after `max_terms` terms, or on an
// exact cycle short-circuit if enabled.
inline CertifiedValue series_core(const PiecewiseRecurrence& rec, const Rational& q,
                                  const std::optional<Rational>& eps,
                                  std::optional<std::size_t> max_terms, bool detect_cycles) {
    const Rational c = rec.max_r();
    const Rational supa = rec.sup_a();
    const Rational tail_scale = supa / (1 - c);

    Rational sum = 0, w = 1;
    Rational cur = q;
    std::map<Rational, std::size_t> seen;
    std::vector<Rational> points;
    std::size_t n = 0;
    while (true) {
        Rational tail = w * tail_scale;
        if (eps && tail <= *eps) return {sum, sum + tail, n, tail == 0};
        if (max_terms && n >= *max_terms) return {sum, sum + tail, n, false};
        if (detect_cycles) {
            auto it = seen.find(cur);
            if (it != seen.end()) {
                // exact value on the cycle entry, then the prefix is already
                // accumulated in (sum, w)
                std::size_t m = it->second;
                std::size_t k = n - m;
                Rational A = 0, W = 1;
                for (std::size_t i = 0; i < k; ++i) {
                    MapValue mv = eval_map(rec, points[m + i]);
                    A += W * mv.a;
                    W *= mv.r;
                }
                // sum already contains the first n terms; strip back to the
                // first m and add w_m·(cycle value)
                Rational prefix_sum = 0, prefix_w = 1;
                for (std::size_t i = 0; i < m; ++i) {
                    MapValue mv = eval_map(rec, points[i]);
                    prefix_sum += prefix_w * mv.a;
                    prefix_w *= mv.r;
                }
                Rational value = prefix_sum + prefix_w * A / (1 - W);
                return {value, value, n, true};
            }
            seen.emplace(cur, n);
            points.push_back(cur);
        }
        MapValue mv = eval_map(rec, cur);
        sum += w * mv.a;
        w *= mv.r;
        cur = mv.f;
        ++n;
    }
}

}  // namespace detail

// Certified evaluation of E*(q) to absolute width eps.
inline CertifiedValue series_eval(const PiecewiseRecurrence& rec, const Rational& q,
                                  const Rational& eps, bool detect_cycles = true) {
    if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
    return detail::series_core(rec, q, eps, std::nullopt, detect_cycles);
}

// Plain truncation after `terms` terms, no cycle short-circuit.  Lower is
// monotone nondecreasing and upper monotone nonincreasing in `terms`.
inline CertifiedValue series_partial(const PiecewiseRecurrence& rec, const Rational& q,
                                     std::size_t terms) {
    return detail::series_core(rec, q, std::nullopt, terms, false);
}

enum class Verdict { A_below_B, B_below_A, Undetermined };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::A_below_B: return "A_below_B";
        case Verdict::B_below_A: return "B_below_A";
        case Verdict::Undetermined: return "Undetermined";
    }
    return "?";
}

struct ComparisonRow {
    Rational q;
    CertifiedValue a_value, b_value;
    Verdict verdict = Verdict::Undetermined;
};

// Certified per-point ordering of two strategies.  A verdict is only issued
// when the enclosures separate strictly; overlapping enclosures stay
// Undetermined rather than looping on ever-smaller eps.
inline std::vector<ComparisonRow> compare_strategies(const PiecewiseRecurrence& rec_a,
                                                     const PiecewiseRecurrence& rec_b,
                                                     const std::vector<Rational>& qs,
                                                     const Rational& eps) {
    std::vector<ComparisonRow> rows;
    rows.reserve(qs.size());
    for (const Rational& q : qs) {
        ComparisonRow row;
        row.q = q;
        row.a_value = series_eval(rec_a, q, eps);
        row.b_value = series_eval(rec_b, q, eps);
        if (row.a_value.upper < row.b_value.lower)
            row.verdict = Verdict::A_below_B;
        else if (row.b_value.upper < row.a_value.lower)
            row.verdict = Verdict::B_below_A;
        else
            row.verdict = Verdict::Undetermined;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

// The piece seen by points infinitesimally to the given side of cur.
inline const Piece& side_piece(const PiecewiseRecurrence& rec, const Rational& cur, int side) {
    for (const Piece& pc : rec.pieces) {
        if (side > 0 ? (pc.iv.lo <= cur && cur < pc.iv.hi) : (pc.iv.lo < cur && cur <= pc.iv.hi))
            return pc;
    }
    throw OutOfDomain("no piece on that side of q = " + rat_str(cur));
}

// Certified enclosure of the one-sided limit E*(q0^side): the orbit series
// with piece selection resolved toward the approach side.  The side flips
// under negative-slope branches and the state may cycle, which yields the
// exact limit.
inline CertifiedValue side_limit(const PiecewiseRecurrence& rec, const Rational& q0, int side,
                                 const Rational& eps) {
    const Rational tail_scale = rec.sup_a() / (1 - rec.max_r());
    Rational sum = 0, w = 1, cur = q0;
    std::map<std::pair<Rational, int>, std::size_t> seen;
    std::vector<std::pair<Rational, int>> states;
    std::size_t n = 0;
    while (true) {
        Rational tail = w * tail_scale;
        if (tail <= eps) return {sum, sum + tail, n, tail == 0};
        auto key = std::make_pair(cur, side);
        auto it = seen.find(key);
        if (it != seen.end()) {
            std::size_t m = it->second;
            Rational A = 0, W = 1, ps = 0, pw = 1;
            for (std::size_t i = 0; i < states.size(); ++i) {
                const Piece& pc = side_piece(rec, states[i].first, states[i].second);
                if (i < m) {
                    ps += pw * pc.a;
                    pw *= pc.r;
                } else {
                    A += W * pc.a;
                    W *= pc.r;
                }
            }
            Rational value = ps + pw * A / (1 - W);
            return {value, value, n, true};
        }
        seen.emplace(key, n);
        states.push_back(key);
        const Piece& pc = side_piece(rec, cur, side);
        sum += w * pc.a;
        w *= pc.r;
        cur = pc.f(cur);
        if (pc.f.slope < 0) side = -side;
        ++n;
    }
}

}  // namespace detail

// Certified lower bound on the jump of E* at q0: enclosures of the two
// one-sided limits, returning how far they separate.  Zero whenever E* is
// continuous at q0 (generic points, or any rec with a continuous solution).
inline Rational discontinuity_gap(const PiecewiseRecurrence& rec, const Rational& q0,
                                  const Rational& side_eps) {
    if (!(q0 > 0 && q0 < 1)) throw OutOfDomain("q0 must lie in (0,1)");
    if (!(side_eps > 0 && side_eps < rec.p * rec.p))
        throw std::invalid_argument("side_eps must satisfy 0 < side_eps < p^2");
    CertifiedValue left = detail::side_limit(rec, q0, -1, side_eps);
    CertifiedValue right = detail::side_limit(rec, q0, +1, side_eps);
    Rational lr = left.lower - right.upper, rl = right.lower - left.upper;
    Rational sep = std::max(lr, rl);
    Rational zero(0);
    return std::max(sep, zero);
}

// Finds a discontinuity witness inside (a,b) by the interval-stretching
// argument: push (a,b) forward under f until it straddles an interior
// breakpoint, then pull the breakpoint back through the composed affine map.
struct DiscontinuitySearch {
    Rational witness;
    std::size_t steps = 0;  // forward steps taken before straddling
};

inline std::optional<DiscontinuitySearch> find_discontinuity_in(const PiecewiseRecurrence& rec,
                                                                const Rational& a, const Rational& b,
                                                                std::size_t budget = 0) {
    if (!(a >= 0 && a < b && b <= 1)) throw std::invalid_argument("need 0 <= a < b <= 1");
    const std::vector<Rational> bps = rec.interior_breakpoints();
    if (budget == 0) {
        // the stretching bound: ceil(log(b-a)/log(1-p)) plus margin
        double width = to_double(b - a);
        double cmax = to_double(rec.max_r());
        budget = static_cast<std::size_t>(std::log(width) / std::log(cmax)) + 6;
    }

    Interval cur{a, b, false, false};
    AffineFn g = AffineFn::identity();  // composed forward map on (a,b)
    for (std::size_t step = 0; step <= budget; ++step) {
        for (const Rational& x : bps) {
            if (x > cur.lo && x < cur.hi) return DiscontinuitySearch{g.invert(x), step};
        }
        if (step == budget) break;
        // the open interval lies inside the closure of a single piece
        const Piece& pc = rec.piece_at(cur.sample());
        if (pc.f.slope == 0) return std::nullopt;  // cannot stretch further
        cur = pc.f.image(cur);
        g = pc.f.after(g);
    }
    return std::nullopt;
}

struct PlotRow {
    Rational q, lower, upper;
};

// Enclosures on a uniform grid enriched with the recurrence breakpoints and
// their first three preimage generations, so jumps are sampled on both
// sides.  Interpolating between grid points would silently smooth a
// nowhere-continuous fixpoint; rows are per-point enclosures only.
inline std::vector<PlotRow> plot_series(const PiecewiseRecurrence& rec, std::size_t points,
                                        const Rational& eps) {
    if (points < 2) throw std::invalid_argument("need at least 2 grid points");
    std::vector<Rational> grid;
    for (std::size_t i = 0; i < points; ++i) grid.push_back(Rational(i, points - 1));
    std::vector<Rational> frontier = rec.interior_breakpoints();
    grid.insert(grid.end(), frontier.begin(), frontier.end());
    for (int gen = 0; gen < 3; ++gen) {
        std::vector<Rational> next;
        for (const Rational& y : frontier)
            for (const Rational& x : preimages(rec, y)) next.push_back(x);
        grid.insert(grid.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<PlotRow> rows;
    rows.reserve(grid.size());
    for (const Rational& q : grid) {
        CertifiedValue v = series_eval(rec, q, eps);
        rows.push_back({q, v.lower, v.upper});
    }
    return rows;
}

}  // namespace qflip
