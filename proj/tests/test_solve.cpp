#include <catch2/catch_amalgamated.hpp>

#include "qflip/orbit.hpp"
#include "qflip/solve.hpp"

using namespace qflip;

namespace {
const Rational kP(1, 4);
const Rational kEps9 = Rational(1, 1000000000);

Rational e0_line(const Rational& q) { return q / kP + (1 - q) / (1 - kP); }
}  // namespace

TEST_CASE("series_eval encloses the closed-form solutions") {
    auto h0 = make_builtin(Family::H0, kP);
    auto e0 = make_builtin(Family::E0, kP);
    for (int i = 0; i <= 40; ++i) {
        Rational q(i, 40);
        auto vh = series_eval(h0, q, kEps9, false);
        REQUIRE(vh.lower <= q);
        REQUIRE(q <= vh.upper);
        REQUIRE(vh.width() <= kEps9);
        auto ve = series_eval(e0, q, kEps9, false);
        REQUIRE(ve.lower <= e0_line(q));
        REQUIRE(e0_line(q) <= ve.upper);
    }
    auto v = series_eval(e0, Rational(1, 2), kEps9);
    CHECK(v.lower <= Rational(8, 3));
    CHECK(Rational(8, 3) <= v.upper);
}

TEST_CASE("E2 at 11/20 certifiably exceeds 323/128") {
    auto e2 = make_builtin(Family::E2, kP);
    auto v = series_eval(e2, Rational(11, 20), kEps9);
    CHECK(v.lower > Rational(323, 128));
}

TEST_CASE("cycle short-circuit gives the exact forced value") {
    auto e1 = make_builtin(Family::E1, kP);
    auto v = series_eval(e1, Rational(11, 20), kEps9);
    CHECK(v.exact);
    CHECK(v.lower == Rational(5, 2));
    CHECK(v.upper == Rational(5, 2));
}

TEST_CASE("enclosure monotonicity in the truncation depth") {
    auto e1 = make_builtin(Family::E1, kP);
    for (Rational q : {Rational(113, 355), Rational(11, 20), Rational(1, 3)}) {
        Rational prev_lo(-1), prev_hi(1000);
        for (std::size_t n = 0; n <= 40; n += 4) {
            auto v = series_partial(e1, q, n);
            REQUIRE(v.lower >= prev_lo);
            REQUIRE(v.upper <= prev_hi);
            REQUIRE(v.lower <= v.upper);
            prev_lo = v.lower;
            prev_hi = v.upper;
        }
    }
}

TEST_CASE("forced value lies in every truncated enclosure") {
    auto e1 = make_builtin(Family::E1, kP);
    for (Rational q : {Rational(11, 20), Rational(49, 64), Rational(1, 5), Rational(1)}) {
        Rational forced = forced_value(e1, q).value;
        for (std::size_t n = 0; n <= 60; n += 5) {
            auto v = series_partial(e1, q, n);
            REQUIRE(v.lower <= forced);
            REQUIRE(forced <= v.upper);
        }
    }
}

TEST_CASE("global bounds for the expectation family") {
    auto e1 = make_builtin(Family::E1, kP);
    for (int i = 0; i <= 64; ++i) {
        Rational q(i, 64);
        auto v = series_eval(e1, q, Rational(1, 1000000));
        REQUIRE(v.lower >= 1);
        REQUIRE(v.upper <= 1 / kP);
    }
}

TEST_CASE("E2 partial sums dominate the geometric series in p") {
    auto e2 = make_builtin(Family::E2, kP);
    for (Rational q : {Rational(11, 20), Rational(1, 3), Rational(7, 8)}) {
        for (std::size_t n = 1; n <= 30; n += 3) {
            auto v = series_partial(e2, q, n);
            Rational geo = 0, pw = 1;
            for (std::size_t i = 0; i < n; ++i) {
                geo += pw;
                pw *= kP;
            }
            REQUIRE(v.lower >= geo);
        }
    }
}

TEST_CASE("spectral bounds of the builtins") {
    CHECK(spectral_bound(make_builtin(Family::E1, kP)) == Rational(3, 4));
    CHECK(spectral_bound(make_builtin(Family::H0, kP)) == Rational(3, 4));
    PiecewiseRecurrence flat;
    flat.p = kP;
    flat.pieces.push_back({{Rational(0), Rational(1), true, true}, AffineFn::constant(Rational(0)),
                           kP, Rational(1)});
    CHECK(spectral_bound(flat) == kP);
}

TEST_CASE("strategy comparison certifies the inversion at 11/20") {
    auto e1 = make_builtin(Family::E1, kP);
    auto e2 = make_builtin(Family::E2, kP);
    auto rows = compare_strategies(e1, e2, {Rational(11, 20)}, kEps9);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].verdict == Verdict::A_below_B);
    CHECK(rows[0].b_value.lower - rows[0].a_value.upper >= Rational(3, 128) - kEps9);
}

TEST_CASE("E1 never certifiably exceeds E0") {
    auto e1 = make_builtin(Family::E1, kP);
    auto e0 = make_builtin(Family::E0, kP);
    std::vector<Rational> qs;
    for (int i = 0; i <= 50; ++i) qs.push_back(Rational(i, 50));
    for (auto& row : compare_strategies(e1, e0, qs, Rational(1, 1000000)))
        CHECK(row.verdict != Verdict::B_below_A);
}

TEST_CASE("self-comparison is always undetermined") {
    auto e1 = make_builtin(Family::E1, kP);
    std::vector<Rational> qs{Rational(0), Rational(11, 20), Rational(9, 10)};
    for (auto& row : compare_strategies(e1, e1, qs, kEps9))
        CHECK(row.verdict == Verdict::Undetermined);
}

TEST_CASE("discontinuity gaps at the breakpoints") {
    auto e1 = make_builtin(Family::E1, kP);
    Rational side(1, 64);
    CHECK(discontinuity_gap(e1, Rational(3, 4), side) >= Rational(1, 2));
    CHECK(discontinuity_gap(e1, Rational(1, 4), side) >= Rational(1, 2));
    CHECK_THROWS_AS(discontinuity_gap(e1, Rational(3, 4), Rational(1, 8)), std::invalid_argument);
    CHECK_THROWS_AS(discontinuity_gap(e1, Rational(0), side), OutOfDomain);
}

TEST_CASE("continuous solutions show zero gap everywhere") {
    auto e0 = make_builtin(Family::E0, kP);
    for (Rational q : {Rational(1, 4), Rational(1, 2), Rational(2, 7), Rational(9, 10)})
        CHECK(discontinuity_gap(e0, q, Rational(1, 64)) == 0);
}

TEST_CASE("discontinuity search: straddling case and stretching case") {
    auto e1 = make_builtin(Family::E1, kP);
    auto direct = find_discontinuity_in(e1, Rational(7, 10), Rational(4, 5));
    REQUIRE(direct.has_value());
    CHECK(direct->witness == Rational(3, 4));
    CHECK(direct->steps == 0);

    auto stretched = find_discontinuity_in(e1, Rational(3, 10), Rational(8, 25));
    REQUIRE(stretched.has_value());
    CHECK(stretched->witness > Rational(3, 10));
    CHECK(stretched->witness < Rational(8, 25));
    CHECK(discontinuity_gap(e1, stretched->witness, Rational(1, 1024)) > 0);
}

TEST_CASE("plot rows stay within the global bounds and cover the grid") {
    auto e0 = make_builtin(Family::E0, kP);
    auto rows = plot_series(e0, 3, Rational(1, 1000000));
    Rational expect[3][2] = {{Rational(0), Rational(4, 3)},
                             {Rational(1, 2), Rational(8, 3)},
                             {Rational(1), Rational(4)}};
    for (auto& [q, val] : expect) {
        bool found = false;
        for (auto& r : rows)
            if (r.q == q) {
                found = true;
                CHECK(r.lower <= val);
                CHECK(val <= r.upper);
            }
        CHECK(found);
    }
}
