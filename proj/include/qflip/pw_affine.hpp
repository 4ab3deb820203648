#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qflip/interval.hpp"
#include "qflip/process.hpp"

namespace qflip {

// A total piecewise-affine function on [0,1], stored as an explicit interval
// partition with one affine per part.  The interval flags decide which part
// owns each breakpoint, so discontinuous functions (such as g∘f for a
// recurrence map f) are represented exactly.
struct PwAffine {
    struct Part {
        Interval iv;
        AffineFn fn;
    };
    std::vector<Part> parts;  // ordered partition of [0,1]

    Rational eval(const Rational& q) const { return part_at(q).fn(q); }

    const Part& part_at(const Rational& q) const {
        for (const Part& p : parts)
            if (p.iv.contains(q)) return p;
        throw OutOfDomain("PwAffine: no part contains q = " + rat_str(q));
    }

    // The unique part whose interval contains the (nonempty) cell.  Cells
    // produced against this function's boundary set never straddle parts.
    const Part& part_on(const Interval& cell) const { return part_at(cell.sample()); }

    std::vector<Rational> boundary_points() const {
        std::vector<Rational> pts;
        for (const Part& p : parts) {
            pts.push_back(p.iv.lo);
            pts.push_back(p.iv.hi);
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }

    std::vector<std::string> validate_partition() const {
        std::vector<std::string> out;
        if (parts.empty()) {
            out.push_back("no parts");
            return out;
        }
        if (!(parts.front().iv.lo == 0 && parts.front().iv.lo_closed))
            out.push_back("does not start closed at 0");
        if (!(parts.back().iv.hi == 1 && parts.back().iv.hi_closed))
            out.push_back("does not end closed at 1");
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            const Interval& cur = parts[i].iv;
            const Interval& nxt = parts[i + 1].iv;
            if (cur.hi != nxt.lo || cur.hi_closed == nxt.lo_closed)
                out.push_back("gap/overlap between " + cur.str() + " and " + nxt.str());
        }
        for (const Part& p : parts)
            if (p.iv.empty()) out.push_back("empty part " + p.iv.str());
        return out;
    }

    static PwAffine constant(const Rational& c) {
        return {{{Interval::unit(), AffineFn::constant(c)}}};
    }

    static PwAffine affine(const Rational& slope, const Rational& intercept) {
        return {{{Interval::unit(), AffineFn{slope, intercept}}}};
    }

    // Continuous piecewise-affine from strictly increasing breakpoints
    // 0 = b_0 < ... < b_k = 1 and one affine per span; interior breakpoints
    // are owned by the left span (a continuous function does not care).
    static PwAffine from_breakpoints(const std::vector<Rational>& breaks,
                                     const std::vector<AffineFn>& segs) {
        if (breaks.size() < 2 || segs.size() + 1 != breaks.size())
            throw std::invalid_argument("breakpoints/segments size mismatch");
        PwAffine g;
        for (std::size_t i = 0; i < segs.size(); ++i)
            g.parts.push_back({{breaks[i], breaks[i + 1], i == 0, true}, segs[i]});
        return g;
    }
};

// The closed-form straight-line solution of the unmodified process:
// q/p + (1-q)/(1-p).
inline PwAffine e0_star(const Rational& p) {
    Rational q1p = 1 - p;
    return PwAffine::affine(1 / p - 1 / q1p, 1 / q1p);
}

// Exact composition q ↦ g(f(q)): each recurrence piece is split at the
// f-preimages of g's part boundaries, giving one affine g_part ∘ f per cell.
inline PwAffine pw_compose(const PwAffine& g, const PiecewiseRecurrence& rec,
                           std::size_t piece_limit = default_piece_limit()) {
    PwAffine out;
    for (const Piece& pc : rec.pieces) {
        if (pc.f.slope == 0) {
            out.parts.push_back({pc.iv, AffineFn::constant(g.eval(pc.f.intercept))});
            continue;
        }
        Interval img = pc.f.image(pc.iv);
        for (const PwAffine::Part& gp : g.parts) {
            Interval hit = img.intersect(gp.iv);
            if (hit.empty()) continue;
            Interval sub = pc.f.preimage(hit).intersect(pc.iv);
            if (sub.empty()) continue;
            out.parts.push_back({sub, gp.fn.after(pc.f)});
            if (out.parts.size() > piece_limit)
                throw PieceExplosion("pw_compose exceeded piece limit");
        }
    }
    std::sort(out.parts.begin(), out.parts.end(),
              [](const PwAffine::Part& a, const PwAffine::Part& b) {
                  if (a.iv.lo != b.iv.lo) return a.iv.lo < b.iv.lo;
                  return a.iv.lo_closed && !b.iv.lo_closed;
              });
    return out;
}

struct LeqResult {
    bool ok = true;
    std::optional<Rational> witness;  // a point with g1(q) > g2(q)
};

namespace detail {

// A concrete interior point of `cell` where the affine `slack` is negative,
// given that its one-sided value at `at` is negative.  Affine functions that
// are negative in the limit at a cell endpoint are negative on a
// neighborhood inside the cell.
inline Rational negative_point_in(const Interval& cell, const AffineFn& slack, const Rational& at) {
    if (cell.contains(at)) return at;
    Rational other = (at == cell.lo) ? cell.hi : cell.lo;
    Rational step = (other - at) / 2;
    if (slack.slope != 0) {
        Rational cap = Rational(-slack(at)) / (2 * Rational(abs(slack.slope)));
        if (Rational(abs(step)) > cap) step = step > 0 ? cap : Rational(-cap);
    }
    return at + step;
}

}  // namespace detail

// Exact pointwise comparison g1 <= g2 on `guard`.  Each refined cell is an
// affine-vs-affine comparison decided at its endpoints.
inline LeqResult pw_leq_on(const PwAffine& g1, const PwAffine& g2, const Interval& guard) {
    std::vector<Rational> pts = g1.boundary_points();
    for (auto& x : g2.boundary_points()) pts.push_back(x);
    for (const Interval& cell : make_cells(guard, std::move(pts))) {
        AffineFn slack = g2.part_on(cell).fn - g1.part_on(cell).fn;
        for (const Rational& end : {cell.lo, cell.hi}) {
            if (slack(end) < 0)
                return {false, detail::negative_point_in(cell, slack, end)};
        }
    }
    return {};
}

inline LeqResult pw_leq(const PwAffine& g1, const PwAffine& g2) {
    return pw_leq_on(g1, g2, Interval::unit());
}

}  // namespace qflip
