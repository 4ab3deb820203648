#include <catch2/catch_amalgamated.hpp>

#include "qflip/config.hpp"

using namespace qflip;

TEST_CASE("rational parsing accepts fractions, integers and exact decimals") {
    CHECK(parse_rational("11/20") == Rational(11, 20));
    CHECK(parse_rational("-3/9") == Rational(-1, 3));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(parse_rational("0.55") == Rational(11, 20));
    CHECK(parse_rational("1e-9") == Rational(1, 1000000000));
    CHECK(parse_rational("2.5e2") == Rational(250));
    CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1.2.3"), std::invalid_argument);
}

TEST_CASE("recurrence round-trips through JSON exactly") {
    for (Family f : {Family::H0, Family::E0, Family::E1, Family::E2, Family::E3}) {
        auto rec = make_builtin(f, Rational(1, 4));
        Json j = recurrence_to_json(rec);
        auto back = recurrence_from_json(j);
        REQUIRE(back.pieces.size() == rec.pieces.size());
        CHECK(back.p == rec.p);
        CHECK(back.label == rec.label);
        for (std::size_t i = 0; i < rec.pieces.size(); ++i) {
            CHECK(back.pieces[i].iv == rec.pieces[i].iv);
            CHECK(back.pieces[i].f == rec.pieces[i].f);
            CHECK(back.pieces[i].r == rec.pieces[i].r);
            CHECK(back.pieces[i].a == rec.pieces[i].a);
        }
        // idempotent after the first normalization
        CHECK(recurrence_to_json(back) == j);
    }
}

TEST_CASE("recurrence ingestion validates") {
    Json j = recurrence_to_json(make_builtin(Family::E1, Rational(1, 4)));
    j["pieces"][0]["r"] = "3/2";
    CHECK_THROWS_AS(recurrence_from_json(j), ConfigError);
    Json j2 = recurrence_to_json(make_builtin(Family::E1, Rational(1, 4)));
    j2["pieces"][0]["hi"] = "1/5";
    CHECK_THROWS_AS(recurrence_from_json(j2), ConfigError);
    CHECK_THROWS_AS(recurrence_from_json(Json{{"p", "1/4"}}), ConfigError);
    Json j3 = recurrence_to_json(make_builtin(Family::E1, Rational(1, 4)));
    j3["p"] = 0.25;  // binary float is rejected, exactness must survive
    CHECK_THROWS_AS(recurrence_from_json(j3), ConfigError);
}

TEST_CASE("property specs round-trip through JSON") {
    for (const PropertySpec& spec : {spec_E1_le_E0(Rational(1, 4)), spec_pair_le(Rational(1, 4))}) {
        Json j = spec_to_json(spec);
        PropertySpec back = spec_from_json(j);
        REQUIRE(back.clauses.size() == spec.clauses.size());
        CHECK(back.arity == spec.arity);
        for (std::size_t i = 0; i < spec.clauses.size(); ++i) {
            const Clause &a = spec.clauses[i], &b = back.clauses[i];
            CHECK(a.label == b.label);
            CHECK(a.kind == b.kind);
            CHECK(a.subject == b.subject);
            CHECK(a.guard == b.guard);
            CHECK(a.offset == b.offset);
            REQUIRE(a.bound.parts.size() == b.bound.parts.size());
            for (std::size_t k = 0; k < a.bound.parts.size(); ++k) {
                CHECK(a.bound.parts[k].iv == b.bound.parts[k].iv);
                CHECK(a.bound.parts[k].fn == b.bound.parts[k].fn);
            }
        }
        // behavioral equivalence of the round-tripped spec
        auto e1 = make_builtin(Family::E1, Rational(1, 4));
        if (spec.arity == 1)
            CHECK(check_preservation(back, {e1}).status ==
                  check_preservation(spec, {e1}).status);
    }
}

TEST_CASE("spec ingestion rejects malformed clauses") {
    Json j = spec_to_json(spec_pair_le(Rational(1, 4)));
    j["arity"] = 1;  // cross clause now out of range
    CHECK_THROWS_AS(spec_from_json(j), ConfigError);

    Json shift{{"label", "bad"},
               {"arity", 1},
               {"clauses", Json::array({Json{{"kind", "shift"},
                                             {"guard_lo", "1/2"},
                                             {"guard_hi", "1"},
                                             {"offset", "3/4"}}})}};
    CHECK_THROWS_AS(spec_from_json(shift), ConfigError);  // guard + offset leaves [0,1]

    CHECK_THROWS_AS(spec_from_json(Json{{"arity", 1}}), ConfigError);
}

TEST_CASE("pw affine shorthand forms") {
    auto c = pw_affine_from_json(Json("5/4"), "t");
    CHECK(c.eval(Rational(1, 3)) == Rational(5, 4));
    auto a = pw_affine_from_json(Json::array({"8/3", "4/3"}), "t");
    CHECK(a.eval(Rational(1, 2)) == Rational(8, 3));
}

TEST_CASE("verification reports serialize with exact witnesses") {
    auto e1 = make_builtin(Family::E1, Rational(1, 4));
    auto e2 = make_builtin(Family::E2, Rational(1, 4));
    auto rep = run_pipeline(spec_pair_le(Rational(1, 4)), {e2, e1});
    Json j = report_to_json(rep);
    CHECK(j["status"] == "Violation");
    REQUIRE(j.contains("witness"));
    Rational q = parse_rational(j["witness"]["q"].get<std::string>());
    Rational lhs = parse_rational(j["witness"]["lhs"].get<std::string>());
    Rational rhs = parse_rational(j["witness"]["rhs"].get<std::string>());
    CHECK(q == rep.witness->q);
    CHECK(lhs > rhs);
}
