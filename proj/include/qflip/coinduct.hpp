#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qflip/pw_affine.hpp"
#include "qflip/process.hpp"
#include "qflip/solve.hpp"

namespace qflip {

struct UnsupportedClauseCombination : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ClauseKind { UpperBound, LowerBound, CrossBound, ShiftEquality };

inline const char* clause_kind_name(ClauseKind k) {
    switch (k) {
        case ClauseKind::UpperBound: return "upper";
        case ClauseKind::LowerBound: return "lower";
        case ClauseKind::CrossBound: return "cross";
        case ClauseKind::ShiftEquality: return "shift";
    }
    return "?";
}

// One guarded pointwise constraint over the unknown function(s):
//   UpperBound:    q ∈ guard  ⟹  u_subject(q) <= bound(q)
//   LowerBound:    q ∈ guard  ⟹  u_subject(q) >= bound(q)
//   CrossBound:    q ∈ guard  ⟹  u_0(q) <= u_1(q)
//   ShiftEquality: q ∈ guard  ⟹  u_subject(q) = u_subject(q + offset)
struct Clause {
    std::string label;
    ClauseKind kind = ClauseKind::UpperBound;
    int subject = 0;
    Interval guard = Interval::unit();
    PwAffine bound;
    Rational offset;
};

// A conjunction of clauses encoding a closed property of one or two unknown
// bounded functions on [0,1].
struct PropertySpec {
    std::string label;
    int arity = 1;
    std::vector<Clause> clauses;
};

struct Witness {
    std::string clause;
    Rational q, lhs, rhs;
};

enum class VerifyStatus { Verified, Violation };

struct VerificationReport {
    VerifyStatus status = VerifyStatus::Verified;
    std::optional<Witness> witness;
    bool spectral_ok = true;
    std::vector<std::string> detail;
};

// ---------------------------------------------------------------------------
// Nonemptiness: search a small family of constant/affine witnesses.

struct NonemptyResult {
    bool found = false;
    std::vector<PwAffine> assignment;  // one function per subject
    std::string description;
};

namespace detail {

// partial function q ↦ g(q + o), defined where q + o stays in [0,1]
inline PwAffine shift_argument(const PwAffine& g, const Rational& o) {
    PwAffine out;
    for (const PwAffine::Part& p : g.parts) {
        Interval iv = p.iv.shifted(-o).intersect(Interval::unit());
        if (iv.empty()) continue;
        out.parts.push_back({iv, {p.fn.slope, p.fn.slope * o + p.fn.intercept}});
    }
    return out;
}

inline bool pw_equal_on(const PwAffine& a, const PwAffine& b, const Interval& guard) {
    return pw_leq_on(a, b, guard).ok && pw_leq_on(b, a, guard).ok;
}

inline bool satisfies(const std::vector<PwAffine>& cand, const Clause& c) {
    if (c.guard.empty()) return true;
    switch (c.kind) {
        case ClauseKind::UpperBound:
            return pw_leq_on(cand[c.subject], c.bound, c.guard).ok;
        case ClauseKind::LowerBound:
            return pw_leq_on(c.bound, cand[c.subject], c.guard).ok;
        case ClauseKind::CrossBound:
            return pw_leq_on(cand[0], cand[1], c.guard).ok;
        case ClauseKind::ShiftEquality:
            return pw_equal_on(cand[c.subject], shift_argument(cand[c.subject], c.offset), c.guard);
    }
    return false;
}

inline std::vector<PwAffine> candidate_pool(const PropertySpec& spec, int subject) {
    std::vector<PwAffine> pool;
    auto add_const = [&](const Rational& v) { pool.push_back(PwAffine::constant(v)); };
    add_const(0);
    add_const(1);
    for (const Clause& c : spec.clauses) {
        if (c.subject != subject) continue;
        if (c.kind != ClauseKind::UpperBound && c.kind != ClauseKind::LowerBound) continue;
        pool.push_back(c.bound);
        // extreme values of the bound over its guard, as constant candidates
        Rational mn, mx;
        bool first = true;
        for (const PwAffine::Part& p : c.bound.parts) {
            Interval iv = p.iv.intersect(c.guard);
            if (iv.empty()) continue;
            for (const Rational& e : {iv.lo, iv.hi}) {
                Rational v = p.fn(e);
                if (first || v < mn) mn = v;
                if (first || v > mx) mx = v;
                first = false;
            }
        }
        if (!first) {
            add_const(mn);
            add_const(mx);
        }
    }
    return pool;
}

}  // namespace detail

// Searches constant/affine candidate assignments against all clauses; the
// first satisfying assignment wins (the search order is deterministic).
inline NonemptyResult check_nonempty(const PropertySpec& spec) {
    std::vector<std::vector<PwAffine>> pools;
    for (int s = 0; s < spec.arity; ++s) pools.push_back(detail::candidate_pool(spec, s));

    std::vector<std::size_t> idx(spec.arity, 0);
    while (true) {
        std::vector<PwAffine> cand;
        for (int s = 0; s < spec.arity; ++s) cand.push_back(pools[s][idx[s]]);
        bool ok = true;
        for (const Clause& c : spec.clauses)
            if (!detail::satisfies(cand, c)) {
                ok = false;
                break;
            }
        if (ok) {
            NonemptyResult res{true, cand, ""};
            for (int s = 0; s < spec.arity; ++s) {
                const PwAffine& g = cand[s];
                std::string desc;
                if (g.parts.size() == 1 && g.parts[0].fn.slope == 0)
                    desc = "constant " + rat_str(g.parts[0].fn.intercept);
                else if (g.parts.size() == 1)
                    desc = rat_str(g.parts[0].fn.slope) + "*q + " + rat_str(g.parts[0].fn.intercept);
                else
                    desc = "piecewise-affine (" + std::to_string(g.parts.size()) + " parts)";
                res.description += (s ? ", u" : "u") + std::to_string(s) + " = " + desc;
            }
            return res;
        }
        // next tuple
        int s = spec.arity - 1;
        while (s >= 0 && ++idx[s] == pools[s].size()) idx[s--] = 0;
        if (s < 0) break;
    }
    return {};
}

// ---------------------------------------------------------------------------
// Preservation under τ.

namespace detail {

struct DerivedBound {
    AffineFn fn;  // affine in q on the current cell
    std::string via;
};

// Significant points in image space: clause guard endpoints and bound part
// boundaries, plus their translates by every shift offset.
inline std::vector<Rational> base_image_points(const PropertySpec& spec) {
    std::vector<Rational> pts{Rational(0), Rational(1)};
    auto add = [&](const Rational& x) { pts.push_back(x); };
    for (const Clause& c : spec.clauses) {
        add(c.guard.lo);
        add(c.guard.hi);
        if (c.kind == ClauseKind::UpperBound || c.kind == ClauseKind::LowerBound)
            for (const Rational& x : c.bound.boundary_points()) add(x);
    }
    std::vector<Rational> shifted;
    for (const Clause& c : spec.clauses) {
        if (c.kind != ClauseKind::ShiftEquality) continue;
        for (const Rational& x : pts) {
            shifted.push_back(x + c.offset);
            shifted.push_back(x - c.offset);
        }
    }
    pts.insert(pts.end(), shifted.begin(), shifted.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// All bounds on u_subject at the image point pt(q), q ∈ cell, derivable from
// the assumed clauses by the built-in chain: optional ShiftEquality
// relocation, optional CrossBound transfer, then a direct guarded bound.
inline std::vector<DerivedBound> derive_bounds(const PropertySpec& spec, int subject, bool upper,
                                               const AffineFn& img, const Interval& cell) {
    std::vector<std::pair<AffineFn, std::string>> points{{img, ""}};
    Interval j0 = img.image(cell);
    for (const Clause& sh : spec.clauses) {
        if (sh.kind != ClauseKind::ShiftEquality || sh.subject != subject) continue;
        if (sh.guard.contains(j0))
            points.push_back({img.plus(sh.offset), "shift(" + sh.label + ")+"});
        if (sh.guard.shifted(sh.offset).contains(j0))
            points.push_back({img.plus(-sh.offset), "shift(" + sh.label + ")-"});
    }

    std::vector<DerivedBound> out;
    for (const auto& [pt, via] : points) {
        Interval jp = pt.image(cell);
        for (const Clause& d : spec.clauses) {
            ClauseKind want = upper ? ClauseKind::UpperBound : ClauseKind::LowerBound;
            if (d.kind != want) continue;
            bool direct = (d.subject == subject);
            bool crossed = false;
            if (!direct) {
                for (const Clause& x : spec.clauses) {
                    if (x.kind != ClauseKind::CrossBound || !x.guard.contains(jp)) continue;
                    if (upper && subject == 0 && d.subject == 1) crossed = true;    // u0 <= u1 <= bound
                    if (!upper && subject == 1 && d.subject == 0) crossed = true;   // u1 >= u0 >= bound
                }
            }
            if (!(direct || crossed)) continue;
            if (!d.guard.contains(jp)) continue;
            for (const PwAffine::Part& part : d.bound.parts) {
                if (!part.iv.contains(jp)) continue;
                std::string how = via.empty() ? d.label : via + "->" + d.label;
                if (crossed) how += "(via cross)";
                out.push_back({part.fn.after(pt), how});
                break;
            }
        }
    }
    // drop exact duplicates
    std::vector<DerivedBound> uniq;
    for (auto& b : out) {
        bool dup = false;
        for (auto& u : uniq)
            if (u.fn == b.fn) dup = true;
        if (!dup) uniq.push_back(std::move(b));
    }
    return uniq;
}

inline std::vector<Rational> pairwise_roots(const std::vector<AffineFn>& fns, const Interval& cell) {
    std::vector<Rational> roots;
    for (std::size_t i = 0; i < fns.size(); ++i)
        for (std::size_t j = i + 1; j < fns.size(); ++j) {
            if (fns[i].slope == fns[j].slope) continue;
            Rational x = (fns[j].intercept - fns[i].intercept) / (fns[i].slope - fns[j].slope);
            if (x > cell.lo && x < cell.hi) roots.push_back(x);
        }
    return roots;
}

// q-space split points for a guard: recurrence piece boundaries and the
// piece-map preimages of every significant image point.
inline std::vector<Rational> guard_splits(const PropertySpec& spec,
                                          const std::vector<const PiecewiseRecurrence*>& recs,
                                          const std::vector<Rational>& image_pts) {
    std::vector<Rational> splits;
    for (const PiecewiseRecurrence* rec : recs) {
        for (const Piece& pc : rec->pieces) {
            splits.push_back(pc.iv.lo);
            splits.push_back(pc.iv.hi);
            if (pc.f.slope == 0) continue;
            for (const Rational& x : image_pts) {
                Rational q = pc.f.invert(x);
                if (q >= pc.iv.lo && q <= pc.iv.hi) splits.push_back(q);
            }
        }
    }
    return splits;
}

struct ClauseFailure {
    Witness witness;
};

// Checks one Upper/LowerBound clause: on every refined cell, the strongest
// derivable conclusion a + r·(best bound at f(q)) is compared against the
// target bound exactly.
inline std::optional<ClauseFailure> check_pointwise_clause(const PropertySpec& spec,
                                                           const Clause& target,
                                                           const PiecewiseRecurrence& rec,
                                                           const std::vector<Rational>& image_pts) {
    bool upper = target.kind == ClauseKind::UpperBound;
    std::vector<Rational> splits = guard_splits(spec, {&rec}, image_pts);
    for (const Rational& x : target.bound.boundary_points()) splits.push_back(x);

    for (const Interval& cell : make_cells(target.guard, splits)) {
        const Piece& pc = rec.pieces[rec.piece_index(cell.sample())];
        std::vector<DerivedBound> cands = derive_bounds(spec, target.subject, upper, pc.f, cell);
        if (cands.empty())
            throw UnsupportedClauseCombination(
                "clause '" + target.label + "': no assumed clause bounds u" +
                std::to_string(target.subject) + " at the image of " + cell.str());
        std::vector<AffineFn> hs;
        for (auto& c : cands) hs.push_back(c.fn.scaled(pc.r).plus(pc.a));
        const AffineFn tfn = target.bound.part_on(cell).fn;

        for (const Interval& sub : make_cells(cell, pairwise_roots(hs, cell))) {
            // best = strongest derivable conclusion on this sub-cell
            Rational mid = sub.sample();
            std::size_t best = 0;
            for (std::size_t i = 1; i < hs.size(); ++i) {
                bool better = upper ? hs[i](mid) < hs[best](mid) : hs[i](mid) > hs[best](mid);
                if (better) best = i;
            }
            AffineFn slack = upper ? tfn - hs[best] : hs[best] - tfn;
            for (const Rational& end : {sub.lo, sub.hi}) {
                if (slack(end) < 0) {
                    Rational q = negative_point_in(sub, slack, end);
                    return ClauseFailure{{target.label, q, hs[best](q), tfn(q)}};
                }
            }
        }
    }
    return std::nullopt;
}

inline std::optional<ClauseFailure> check_cross_clause(const PropertySpec& spec,
                                                       const Clause& target,
                                                       const PiecewiseRecurrence& rec_a,
                                                       const PiecewiseRecurrence& rec_b,
                                                       const std::vector<Rational>& image_pts) {
    std::vector<Rational> splits = guard_splits(spec, {&rec_a, &rec_b}, image_pts);

    for (const Interval& cell : make_cells(target.guard, splits)) {
        const Piece& pa = rec_a.pieces[rec_a.piece_index(cell.sample())];
        const Piece& pb = rec_b.pieces[rec_b.piece_index(cell.sample())];

        // Where the two recurrences agree syntactically, the assumed cross
        // bound at the common image discharges the obligation directly.
        if (pa.a == pb.a && pa.r == pb.r && pa.f == pb.f &&
            target.guard.contains(pa.f.image(cell)))
            continue;

        std::vector<DerivedBound> ups = derive_bounds(spec, 0, /*upper=*/true, pa.f, cell);
        std::vector<DerivedBound> lows = derive_bounds(spec, 1, /*upper=*/false, pb.f, cell);
        if (ups.empty() || lows.empty())
            throw UnsupportedClauseCombination("clause '" + target.label +
                                               "': clause set too weak to relate the two images on " +
                                               cell.str());
        std::vector<AffineFn> hu, hl;
        for (auto& c : ups) hu.push_back(c.fn.scaled(pa.r).plus(pa.a));
        for (auto& c : lows) hl.push_back(c.fn.scaled(pb.r).plus(pb.a));

        std::vector<AffineFn> all = hu;
        all.insert(all.end(), hl.begin(), hl.end());
        for (const Interval& sub : make_cells(cell, pairwise_roots(all, cell))) {
            Rational mid = sub.sample();
            std::size_t bu = 0, bl = 0;
            for (std::size_t i = 1; i < hu.size(); ++i)
                if (hu[i](mid) < hu[bu](mid)) bu = i;
            for (std::size_t i = 1; i < hl.size(); ++i)
                if (hl[i](mid) > hl[bl](mid)) bl = i;
            AffineFn slack = hl[bl] - hu[bu];
            for (const Rational& end : {sub.lo, sub.hi}) {
                if (slack(end) < 0) {
                    Rational q = negative_point_in(sub, slack, end);
                    return ClauseFailure{{target.label, q, hu[bu](q), hl[bl](q)}};
                }
            }
        }
    }
    return std::nullopt;
}

inline std::optional<ClauseFailure> check_shift_clause(const PropertySpec& spec,
                                                       const Clause& target,
                                                       const PiecewiseRecurrence& rec,
                                                       const std::vector<Rational>& image_pts) {
    std::vector<Rational> splits = guard_splits(spec, {&rec}, image_pts);
    for (const Piece& pc : rec.pieces) {
        splits.push_back(pc.iv.lo - target.offset);
        splits.push_back(pc.iv.hi - target.offset);
    }

    for (const Interval& cell : make_cells(target.guard, splits)) {
        const Piece& p1 = rec.pieces[rec.piece_index(cell.sample())];
        const Piece& p2 = rec.pieces[rec.piece_index(cell.sample() + target.offset)];
        // map applied at the shifted argument, as a function of q
        AffineFn f2 = p2.f.after({Rational(1), target.offset});

        if (p1.a != p2.a || p1.r != p2.r) {
            Rational q = cell.sample();
            Rational lhs = p1.a != p2.a ? p1.a : p1.r;
            Rational rhs = p1.a != p2.a ? p2.a : p2.r;
            return ClauseFailure{{target.label, q, lhs, rhs}};
        }
        if (f2 == p1.f) continue;  // images literally coincide
        if (f2.slope == p1.f.slope) {
            Rational d = f2.intercept - p1.f.intercept;  // f(q+o) - f(q), constant
            Interval j = p1.f.image(cell);
            if (d == target.offset && target.guard.contains(j)) continue;
            if (d == -target.offset && target.guard.shifted(target.offset).contains(j)) continue;
        }
        // concrete mismatch of the two image maps
        Rational q = cell.sample();
        if (f2(q) == p1.f(q)) q = cell.is_point() ? q : (cell.sample() + cell.hi) / 2;
        return ClauseFailure{{target.label, q, p1.f(q), f2(q)}};
    }
    return std::nullopt;
}

}  // namespace detail

// Verifies the preservation premise ∀e. φ(e) ⟹ φ(τ(e)) clause by clause,
// exactly.  A Violation carries the first failing clause with a witness point
// at which the strongest derivable conclusion re-evaluates false.
inline VerificationReport check_preservation(const PropertySpec& spec,
                                             const std::vector<PiecewiseRecurrence>& recs) {
    if (static_cast<int>(recs.size()) != spec.arity)
        throw std::invalid_argument("spec arity does not match number of recurrences");
    std::vector<Rational> image_pts = detail::base_image_points(spec);

    VerificationReport rep;
    for (const PiecewiseRecurrence& rec : recs) rep.spectral_ok = rep.spectral_ok && spectral_bound(rec) < 1;

    for (const Clause& c : spec.clauses) {
        if (c.guard.empty()) continue;
        std::optional<detail::ClauseFailure> fail;
        switch (c.kind) {
            case ClauseKind::UpperBound:
            case ClauseKind::LowerBound:
                fail = detail::check_pointwise_clause(spec, c, recs[c.subject], image_pts);
                break;
            case ClauseKind::CrossBound:
                if (spec.arity != 2)
                    throw std::invalid_argument("CrossBound clause in an arity-1 spec");
                fail = detail::check_cross_clause(spec, c, recs[0], recs[1], image_pts);
                break;
            case ClauseKind::ShiftEquality:
                fail = detail::check_shift_clause(spec, c, recs[c.subject], image_pts);
                break;
        }
        if (fail) {
            rep.status = VerifyStatus::Violation;
            rep.witness = fail->witness;
            rep.detail.push_back("clause '" + c.label + "' not preserved");
            return rep;
        }
        rep.detail.push_back("clause '" + c.label + "' preserved");
    }
    return rep;
}

// The n-step form of the rule: preservation is checked against τⁿ.
inline VerificationReport preservation_n(const PropertySpec& spec,
                                         const std::vector<PiecewiseRecurrence>& recs, std::size_t n,
                                         std::size_t piece_limit = default_piece_limit()) {
    std::vector<PiecewiseRecurrence> unwound;
    unwound.reserve(recs.size());
    for (const PiecewiseRecurrence& rec : recs) unwound.push_back(unwind(rec, n, piece_limit));
    VerificationReport rep = check_preservation(spec, unwound);
    // the contraction hypothesis is about the original operators
    rep.spectral_ok = true;
    for (const PiecewiseRecurrence& rec : recs) rep.spectral_ok = rep.spectral_ok && spectral_bound(rec) < 1;
    return rep;
}

// Assembles the full soundness verdict: φ holds of the unique bounded
// fixpoint(s) iff the property is nonempty, preserved, and every operator
// satisfies the contraction bound.
inline VerificationReport conclude(const PropertySpec& spec,
                                   const std::vector<PiecewiseRecurrence>& recs,
                                   const NonemptyResult& nonempty,
                                   const VerificationReport& preservation) {
    VerificationReport rep = preservation;
    rep.spectral_ok = true;
    for (const PiecewiseRecurrence& rec : recs) {
        Rational c = spectral_bound(rec);
        rep.spectral_ok = rep.spectral_ok && c < 1;
        rep.detail.push_back("spectral bound of " + rec.label + ": " + rat_str(c));
    }
    if (!nonempty.found) {
        rep.status = VerifyStatus::Violation;
        rep.detail.push_back("nonemptiness: no witness found");
    } else {
        rep.detail.push_back("nonemptiness: " + nonempty.description);
    }
    if (!rep.spectral_ok) rep.status = VerifyStatus::Violation;
    return rep;
}

inline VerificationReport run_pipeline(const PropertySpec& spec,
                                       const std::vector<PiecewiseRecurrence>& recs,
                                       std::size_t n = 1) {
    NonemptyResult ne = check_nonempty(spec);
    VerificationReport pres = n == 1 ? check_preservation(spec, recs) : preservation_n(spec, recs, n);
    return conclude(spec, recs, ne, pres);
}

// ---------------------------------------------------------------------------
// Built-in property specs.

// E* of the modified process lies below the straight-line solution
// q/p + (1-q)/(1-p) of the unmodified one.
inline PropertySpec spec_E1_le_E0(const Rational& p) {
    PropertySpec spec;
    spec.label = "E1_le_E0";
    spec.arity = 1;
    spec.clauses.push_back({"le_E0", ClauseKind::UpperBound, 0, Interval::unit(), e0_star(p), 0});
    return spec;
}

// The strengthened pair hypothesis for E ≤ E' between a breakpoint-c
// strategy and the three-piece strategy: cross bound, the two side bounds,
// the straight-line cap, and the period-(1-p) shift equality on [0,p].
inline PropertySpec spec_pair_le(const Rational& p) {
    Rational q1p = 1 - p;
    PropertySpec spec;
    spec.label = "pair_E3_le_E1";
    spec.arity = 2;
    spec.clauses.push_back({"IH1", ClauseKind::CrossBound, 0, Interval::unit(), {}, 0});
    spec.clauses.push_back({"IH2", ClauseKind::LowerBound, 0, Interval::unit(),
                            PwAffine::constant(1 / q1p), 0});
    spec.clauses.push_back({"IH3", ClauseKind::LowerBound, 1, Interval{p, q1p, false, false},
                            PwAffine::constant(2), 0});
    spec.clauses.push_back({"IH4", ClauseKind::UpperBound, 1, Interval::unit(), e0_star(p), 0});
    spec.clauses.push_back({"IH5", ClauseKind::ShiftEquality, 0, Interval{Rational(0), p, true, true},
                            {}, q1p});
    return spec;
}

}  // namespace qflip
