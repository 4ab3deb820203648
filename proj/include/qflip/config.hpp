#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qflip/coinduct.hpp"
#include "qflip/process.hpp"

namespace qflip {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All rationals travel as strings ("num/den" or exact decimals), never as
// binary floats, so values round-trip exactly.

inline Json rational_to_json(const Rational& x) { return rat_str(x); }

inline Rational rational_from_json(const Json& j, const std::string& where) {
    if (!j.is_string())
        throw ConfigError(where + ": rationals must be strings, got " + j.dump());
    try {
        return parse_rational(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline Json recurrence_to_json(const PiecewiseRecurrence& rec) {
    Json pieces = Json::array();
    for (const Piece& pc : rec.pieces) {
        pieces.push_back({{"lo", rational_to_json(pc.iv.lo)},
                          {"hi", rational_to_json(pc.iv.hi)},
                          {"lo_closed", pc.iv.lo_closed},
                          {"hi_closed", pc.iv.hi_closed},
                          {"f_slope", rational_to_json(pc.f.slope)},
                          {"f_intercept", rational_to_json(pc.f.intercept)},
                          {"r", rational_to_json(pc.r)},
                          {"a", rational_to_json(pc.a)}});
    }
    return {{"label", rec.label}, {"p", rational_to_json(rec.p)}, {"pieces", pieces}};
}

inline PiecewiseRecurrence recurrence_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("pieces"))
        throw ConfigError("recurrence config needs 'p' and 'pieces'");
    PiecewiseRecurrence rec;
    rec.label = j.value("label", std::string("custom"));
    rec.p = rational_from_json(j.at("p"), "p");
    if (!j.at("pieces").is_array() || j.at("pieces").empty())
        throw ConfigError("'pieces' must be a nonempty array");
    std::size_t i = 0;
    for (const Json& pj : j.at("pieces")) {
        std::string at = "pieces[" + std::to_string(i++) + "]";
        for (const char* k : {"lo", "hi", "f_slope", "f_intercept", "r", "a"})
            if (!pj.contains(k)) throw ConfigError(at + ": missing field '" + k + "'");
        Piece pc;
        pc.iv.lo = rational_from_json(pj.at("lo"), at + ".lo");
        pc.iv.hi = rational_from_json(pj.at("hi"), at + ".hi");
        pc.iv.lo_closed = pj.value("lo_closed", true);
        pc.iv.hi_closed = pj.value("hi_closed", true);
        pc.f.slope = rational_from_json(pj.at("f_slope"), at + ".f_slope");
        pc.f.intercept = rational_from_json(pj.at("f_intercept"), at + ".f_intercept");
        pc.r = rational_from_json(pj.at("r"), at + ".r");
        pc.a = rational_from_json(pj.at("a"), at + ".a");
        rec.pieces.push_back(std::move(pc));
    }
    std::vector<std::string> bad = validate(rec);
    if (!bad.empty()) {
        std::string msg = "invalid recurrence:";
        for (auto& b : bad) msg += "\n  " + b;
        throw ConfigError(msg);
    }
    return rec;
}

inline Json pw_affine_to_json(const PwAffine& g) {
    Json parts = Json::array();
    for (const PwAffine::Part& p : g.parts) {
        parts.push_back({{"lo", rational_to_json(p.iv.lo)},
                         {"hi", rational_to_json(p.iv.hi)},
                         {"lo_closed", p.iv.lo_closed},
                         {"hi_closed", p.iv.hi_closed},
                         {"slope", rational_to_json(p.fn.slope)},
                         {"intercept", rational_to_json(p.fn.intercept)}});
    }
    return parts;
}

inline PwAffine pw_affine_from_json(const Json& j, const std::string& where) {
    // shorthand: a single string is a constant, a [slope, intercept] pair is
    // one affine on all of [0,1]
    if (j.is_string()) return PwAffine::constant(rational_from_json(j, where));
    if (j.is_array() && j.size() == 2 && j[0].is_string())
        return PwAffine::affine(rational_from_json(j[0], where + "[0]"),
                                rational_from_json(j[1], where + "[1]"));
    if (!j.is_array()) throw ConfigError(where + ": expected parts array");
    PwAffine g;
    std::size_t i = 0;
    for (const Json& pj : j) {
        std::string at = where + "[" + std::to_string(i++) + "]";
        PwAffine::Part p;
        p.iv.lo = rational_from_json(pj.at("lo"), at + ".lo");
        p.iv.hi = rational_from_json(pj.at("hi"), at + ".hi");
        p.iv.lo_closed = pj.value("lo_closed", true);
        p.iv.hi_closed = pj.value("hi_closed", true);
        p.fn.slope = rational_from_json(pj.at("slope"), at + ".slope");
        p.fn.intercept = rational_from_json(pj.at("intercept"), at + ".intercept");
        g.parts.push_back(std::move(p));
    }
    std::vector<std::string> bad = g.validate_partition();
    if (!bad.empty()) throw ConfigError(where + ": " + bad.front());
    return g;
}

inline ClauseKind clause_kind_from_name(const std::string& s) {
    for (ClauseKind k : {ClauseKind::UpperBound, ClauseKind::LowerBound, ClauseKind::CrossBound,
                         ClauseKind::ShiftEquality})
        if (clause_kind_name(k) == s) return k;
    throw ConfigError("unknown clause kind '" + s + "'");
}

inline Json clause_to_json(const Clause& c) {
    Json j{{"label", c.label},
           {"kind", clause_kind_name(c.kind)},
           {"subject", c.subject},
           {"guard_lo", rational_to_json(c.guard.lo)},
           {"guard_hi", rational_to_json(c.guard.hi)},
           {"guard_lo_closed", c.guard.lo_closed},
           {"guard_hi_closed", c.guard.hi_closed}};
    if (c.kind == ClauseKind::UpperBound || c.kind == ClauseKind::LowerBound)
        j["bound"] = pw_affine_to_json(c.bound);
    if (c.kind == ClauseKind::ShiftEquality) j["offset"] = rational_to_json(c.offset);
    return j;
}

inline Clause clause_from_json(const Json& j, const std::string& where) {
    Clause c;
    c.label = j.value("label", where);
    c.kind = clause_kind_from_name(j.at("kind").get<std::string>());
    c.subject = j.value("subject", 0);
    c.guard.lo = j.contains("guard_lo") ? rational_from_json(j.at("guard_lo"), where) : Rational(0);
    c.guard.hi = j.contains("guard_hi") ? rational_from_json(j.at("guard_hi"), where) : Rational(1);
    c.guard.lo_closed = j.value("guard_lo_closed", true);
    c.guard.hi_closed = j.value("guard_hi_closed", true);
    if (c.guard.lo < 0 || c.guard.hi > 1) throw ConfigError(where + ": guard outside [0,1]");
    if (c.kind == ClauseKind::UpperBound || c.kind == ClauseKind::LowerBound) {
        if (!j.contains("bound")) throw ConfigError(where + ": bound clause needs 'bound'");
        c.bound = pw_affine_from_json(j.at("bound"), where + ".bound");
    }
    if (c.kind == ClauseKind::ShiftEquality) {
        if (!j.contains("offset")) throw ConfigError(where + ": shift clause needs 'offset'");
        c.offset = rational_from_json(j.at("offset"), where + ".offset");
        Interval moved = c.guard.shifted(c.offset);
        if (moved.lo < 0 || moved.hi > 1)
            throw ConfigError(where + ": offset pushes the guard outside [0,1]");
    }
    return c;
}

inline Json spec_to_json(const PropertySpec& spec) {
    Json clauses = Json::array();
    for (const Clause& c : spec.clauses) clauses.push_back(clause_to_json(c));
    return {{"label", spec.label}, {"arity", spec.arity}, {"clauses", clauses}};
}

inline PropertySpec spec_from_json(const Json& j) {
    PropertySpec spec;
    spec.label = j.value("label", std::string("custom"));
    spec.arity = j.value("arity", 1);
    if (spec.arity != 1 && spec.arity != 2) throw ConfigError("arity must be 1 or 2");
    if (!j.contains("clauses") || !j.at("clauses").is_array() || j.at("clauses").empty())
        throw ConfigError("spec needs a nonempty 'clauses' array");
    std::size_t i = 0;
    for (const Json& cj : j.at("clauses")) {
        Clause c = clause_from_json(cj, "clauses[" + std::to_string(i++) + "]");
        if (c.subject < 0 || c.subject >= spec.arity)
            throw ConfigError("clause '" + c.label + "': subject out of range for arity " +
                              std::to_string(spec.arity));
        if (c.kind == ClauseKind::CrossBound && spec.arity != 2)
            throw ConfigError("clause '" + c.label + "': cross clause needs arity 2");
        spec.clauses.push_back(std::move(c));
    }
    return spec;
}

inline Json report_to_json(const VerificationReport& rep) {
    Json j{{"status", rep.status == VerifyStatus::Verified ? "Verified" : "Violation"},
           {"spectral_ok", rep.spectral_ok},
           {"detail", rep.detail}};
    if (rep.witness) {
        j["witness"] = {{"clause", rep.witness->clause},
                        {"q", rational_to_json(rep.witness->q)},
                        {"lhs", rational_to_json(rep.witness->lhs)},
                        {"rhs", rational_to_json(rep.witness->rhs)}};
    }
    return j;
}

}  // namespace qflip
