#pragma once

#include <algorithm>
#include <cassert>
#include <string>
#include <vector>

#include "qflip/rational.hpp"

namespace qflip {

// A rational interval with explicit endpoint ownership.  Boundary points of
// the recurrences carry real discontinuities, so open/closed flags are
// load-bearing throughout the library.
struct Interval {
    Rational lo, hi;
    bool lo_closed = true;
    bool hi_closed = true;

    bool empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }
    bool is_point() const { return lo == hi && lo_closed && hi_closed; }

    bool contains(const Rational& q) const {
        if (q < lo || q > hi) return false;
        if (q == lo && !lo_closed) return false;
        if (q == hi && !hi_closed) return false;
        return true;
    }

    // this ⊇ other (empty intervals are contained in everything)
    bool contains(const Interval& o) const {
        if (o.empty()) return true;
        if (empty()) return false;
        if (o.lo < lo || (o.lo == lo && o.lo_closed && !lo_closed)) return false;
        if (o.hi > hi || (o.hi == hi && o.hi_closed && !hi_closed)) return false;
        return true;
    }

    Interval intersect(const Interval& o) const {
        Interval r;
        if (lo > o.lo) { r.lo = lo; r.lo_closed = lo_closed; }
        else if (lo < o.lo) { r.lo = o.lo; r.lo_closed = o.lo_closed; }
        else { r.lo = lo; r.lo_closed = lo_closed && o.lo_closed; }
        if (hi < o.hi) { r.hi = hi; r.hi_closed = hi_closed; }
        else if (hi > o.hi) { r.hi = o.hi; r.hi_closed = o.hi_closed; }
        else { r.hi = hi; r.hi_closed = hi_closed && o.hi_closed; }
        return r;
    }

    // A point in the interior (or the point itself for singletons).
    Rational sample() const {
        assert(!empty());
        if (lo == hi) return lo;
        return (lo + hi) / 2;
    }

    Rational width() const { return hi - lo; }

    Interval shifted(const Rational& o) const {
        return {lo + o, hi + o, lo_closed, hi_closed};
    }

    std::string str() const {
        return std::string(lo_closed ? "[" : "(") + rat_str(lo) + ", " + rat_str(hi) +
               (hi_closed ? "]" : ")");
    }

    bool operator==(const Interval&) const = default;

    static Interval unit() { return {Rational(0), Rational(1), true, true}; }
    static Interval point(const Rational& q) { return {q, q, true, true}; }
};

// q ↦ slope·q + intercept
struct AffineFn {
    Rational slope, intercept;

    Rational operator()(const Rational& q) const { return slope * q + intercept; }

    // this ∘ inner
    AffineFn after(const AffineFn& inner) const {
        return {slope * inner.slope, slope * inner.intercept + intercept};
    }

    AffineFn operator+(const AffineFn& o) const { return {slope + o.slope, intercept + o.intercept}; }
    AffineFn operator-(const AffineFn& o) const { return {slope - o.slope, intercept - o.intercept}; }
    AffineFn scaled(const Rational& c) const { return {slope * c, intercept * c}; }
    AffineFn plus(const Rational& c) const { return {slope, intercept + c}; }

    Interval image(const Interval& iv) const {
        if (slope > 0) return {(*this)(iv.lo), (*this)(iv.hi), iv.lo_closed, iv.hi_closed};
        if (slope < 0) return {(*this)(iv.hi), (*this)(iv.lo), iv.hi_closed, iv.lo_closed};
        return Interval::point(intercept);
    }

    // requires slope != 0
    Rational invert(const Rational& y) const {
        assert(slope != 0);
        return (y - intercept) / slope;
    }

    Interval preimage(const Interval& iv) const {
        assert(slope != 0);
        if (slope > 0) return {invert(iv.lo), invert(iv.hi), iv.lo_closed, iv.hi_closed};
        return {invert(iv.hi), invert(iv.lo), iv.hi_closed, iv.lo_closed};
    }

    bool operator==(const AffineFn&) const = default;

    static AffineFn identity() { return {Rational(1), Rational(0)}; }
    static AffineFn constant(const Rational& c) { return {Rational(0), c}; }
};

// Splits `within` into maximal cells: a singleton at every split point that
// lies inside the interval, and open intervals between consecutive points.
// Cells partition `within` exactly; each is entirely on one side of every
// split point, which makes guarded case analysis decidable by endpoint
// evaluation.
inline std::vector<Interval> make_cells(const Interval& within, std::vector<Rational> pts) {
    std::vector<Interval> cells;
    if (within.empty()) return cells;
    pts.push_back(within.lo);
    pts.push_back(within.hi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Rational> inside;
    for (auto& x : pts)
        if (x >= within.lo && x <= within.hi) inside.push_back(x);

    for (std::size_t i = 0; i < inside.size(); ++i) {
        Interval point = Interval::point(inside[i]);
        if (within.contains(inside[i])) cells.push_back(point);
        if (i + 1 < inside.size()) {
            Interval open{inside[i], inside[i + 1], false, false};
            if (!open.empty()) cells.push_back(open);
        }
    }
    return cells;
}

}  // namespace qflip
