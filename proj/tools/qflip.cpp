// Command-line surface over the qflip library: certified evaluation, orbit
// analysis, coinductive verification, simulation, plotting, comparison and
// discontinuity probing.  All machine-readable values are exact rational
// strings; decimal columns are display-only.
//
// Exit codes: 0 success/Verified, 1 Violation or reversed ordering,
// 2 input error, 3 budget exhausted.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qflip/config.hpp"
#include "qflip/montecarlo.hpp"
#include "qflip/orbit.hpp"
#include "qflip/solve.hpp"

namespace {

using namespace qflip;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

std::string dec(const Rational& x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", to_double(x));
    return buf;
}

struct RecChoice {
    std::string family;
    std::string config_path;
    std::string p_text = "1/4";
    std::string c_text;
};

PiecewiseRecurrence load_rec(const RecChoice& rc) {
    if (!rc.config_path.empty()) {
        std::ifstream in(rc.config_path);
        if (!in) throw ConfigError("cannot open config file: " + rc.config_path);
        Json j = Json::parse(in);
        return recurrence_from_json(j);
    }
    if (rc.family.empty()) throw ConfigError("need --family or --config");
    auto fam = family_from_name(rc.family);
    if (!fam) throw ConfigError("unknown family '" + rc.family + "'");
    Rational p = parse_rational(rc.p_text);
    std::optional<Rational> c;
    if (!rc.c_text.empty()) c = parse_rational(rc.c_text);
    return make_builtin(*fam, p, c);
}

void add_rec_flags(CLI::App* cmd, RecChoice& rc) {
    cmd->add_option("--family", rc.family, "built-in family: H0, E0, E1, E2, E3");
    cmd->add_option("--config", rc.config_path, "JSON recurrence config file");
    cmd->add_option("--p", rc.p_text, "bias parameter, e.g. 1/4");
    cmd->add_option("--c", rc.c_text, "breakpoint for E3");
}

int cmd_eval(const RecChoice& rc, const std::string& q_text, const std::string& eps_text, bool exact) {
    PiecewiseRecurrence rec = load_rec(rc);
    Rational q = parse_rational(q_text);
    Json out{{"label", rec.label}, {"q", rat_str(q)}};
    if (exact) {
        try {
            ForcedValue fv = forced_value(rec, q);
            out["exact"] = rat_str(fv.value);
            out["exact_dec"] = dec(fv.value);
            out["cycle_entry"] = fv.cycle_entry;
            out["cycle_length"] = fv.cycle_length;
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        } catch (const NoCycleFound& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitBudget;
        }
    }
    CertifiedValue v = series_eval(rec, q, parse_rational(eps_text));
    out["lower"] = rat_str(v.lower);
    out["upper"] = rat_str(v.upper);
    out["lower_dec"] = dec(v.lower);
    out["upper_dec"] = dec(v.upper);
    out["terms_used"] = v.terms_used;
    out["exact"] = v.exact;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_orbit(const RecChoice& rc, const std::string& q_text, std::size_t max_steps) {
    PiecewiseRecurrence rec = load_rec(rc);
    OrbitReport rep = orbit_trace(rec, parse_rational(q_text), max_steps);
    Json pts = Json::array();
    for (const Rational& x : rep.points) pts.push_back(rat_str(x));
    Json out{{"label", rec.label},
             {"points", pts},
             {"classification", rep.classification == ComponentClass::Rational
                                    ? "Rational"
                                    : "NoCycleWithinBudget"}};
    if (rep.cycle_entry) out["cycle_entry"] = *rep.cycle_entry;
    if (rep.cycle_length) out["cycle_length"] = *rep.cycle_length;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& spec_name, const std::string& spec_file,
               const std::vector<std::string>& rec_configs, const std::string& p_text,
               const std::string& c_text, std::size_t n) {
    Rational p = parse_rational(p_text);
    PropertySpec spec;
    std::vector<PiecewiseRecurrence> recs;
    if (!spec_file.empty()) {
        std::ifstream in(spec_file);
        if (!in) throw ConfigError("cannot open spec file: " + spec_file);
        spec = spec_from_json(Json::parse(in));
        for (const std::string& path : rec_configs) {
            std::ifstream rin(path);
            if (!rin) throw ConfigError("cannot open config file: " + path);
            recs.push_back(recurrence_from_json(Json::parse(rin)));
        }
        if (static_cast<int>(recs.size()) != spec.arity)
            throw ConfigError("spec arity " + std::to_string(spec.arity) + " needs that many --config files");
    } else if (spec_name == "builtin:E1_le_E0") {
        spec = spec_E1_le_E0(p);
        recs.push_back(make_builtin(Family::E1, p));
    } else if (spec_name == "builtin:pair_E3_le_E1") {
        spec = spec_pair_le(p);
        std::optional<Rational> c;
        if (!c_text.empty()) c = parse_rational(c_text);
        // c = 1/2 selects the symmetric strategy, whose breakpoint E3 rejects
        if (c && *c == Rational(1, 2))
            recs.push_back(make_builtin(Family::E2, p));
        else
            recs.push_back(make_builtin(Family::E3, p, c));
        recs.push_back(make_builtin(Family::E1, p));
    } else {
        throw ConfigError("unknown spec '" + spec_name + "' (use builtin:E1_le_E0, builtin:pair_E3_le_E1 or --spec-file)");
    }

    VerificationReport rep = run_pipeline(spec, recs, n);
    Json out = report_to_json(rep);
    out["spec"] = spec.label;
    Json rl = Json::array();
    for (const PiecewiseRecurrence& r : recs) rl.push_back(r.label);
    out["recurrences"] = rl;
    std::cout << out.dump(2) << "\n";
    return rep.status == VerifyStatus::Verified ? kExitOk : kExitViolation;
}

int cmd_simulate(int variant, const std::string& p_text, const std::string& q_text,
                 std::uint64_t trials, std::uint64_t seed) {
    Rational p = parse_rational(p_text), q = parse_rational(q_text);
    MCEstimate h = estimate_heads(variant, p, q, trials, seed);
    MCEstimate f = estimate_flips(variant, p, q, trials, seed);
    Json out{{"heads_mean", h.mean},   {"heads_stderr", h.stderr_}, {"flips_mean", f.mean},
             {"flips_stderr", f.stderr_}, {"trials", trials},          {"seed", seed}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_plot(const RecChoice& rc, std::size_t points, const std::string& eps_text,
             const std::string& out_path) {
    PiecewiseRecurrence rec = load_rec(rc);
    std::vector<PlotRow> rows = plot_series(rec, points, parse_rational(eps_text));
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open output file: " + out_path);
    out << "q,lower,upper,q_dec,lower_dec,upper_dec\n";
    for (const PlotRow& r : rows)
        out << rat_str(r.q) << "," << rat_str(r.lower) << "," << rat_str(r.upper) << ","
            << dec(r.q) << "," << dec(r.lower) << "," << dec(r.upper) << "\n";
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    return kExitOk;
}

int cmd_compare(const RecChoice& ra, const RecChoice& rb, std::size_t points,
                const std::string& q_list, const std::string& eps_text, const std::string& out_path) {
    PiecewiseRecurrence rec_a = load_rec(ra), rec_b = load_rec(rb);
    std::vector<Rational> qs;
    if (!q_list.empty()) {
        std::size_t start = 0;
        while (start <= q_list.size()) {
            std::size_t comma = q_list.find(',', start);
            std::string tok = q_list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!tok.empty()) qs.push_back(parse_rational(tok));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    } else {
        if (points < 2) throw ConfigError("need --points >= 2 or --q-list");
        for (std::size_t i = 0; i < points; ++i) qs.push_back(Rational(i, points - 1));
    }
    std::vector<ComparisonRow> rows = compare_strategies(rec_a, rec_b, qs, parse_rational(eps_text));

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ConfigError("cannot open output file: " + out_path);
        out = &file;
    }
    *out << "q,a_lower,a_upper,b_lower,b_upper,verdict,q_dec,a_lower_dec,a_upper_dec,b_lower_dec,b_upper_dec\n";
    bool reversed = false;
    for (const ComparisonRow& r : rows) {
        *out << rat_str(r.q) << "," << rat_str(r.a_value.lower) << "," << rat_str(r.a_value.upper)
             << "," << rat_str(r.b_value.lower) << "," << rat_str(r.b_value.upper) << ","
             << verdict_name(r.verdict) << "," << dec(r.q) << "," << dec(r.a_value.lower) << ","
             << dec(r.a_value.upper) << "," << dec(r.b_value.lower) << "," << dec(r.b_value.upper)
             << "\n";
        if (r.verdict == Verdict::B_below_A) reversed = true;
    }
    return reversed ? kExitViolation : kExitOk;
}

int cmd_discont(const RecChoice& rc, const std::string& lo_text, const std::string& hi_text,
                std::size_t budget) {
    PiecewiseRecurrence rec = load_rec(rc);
    Rational lo = parse_rational(lo_text), hi = parse_rational(hi_text);
    std::optional<DiscontinuitySearch> found = find_discontinuity_in(rec, lo, hi, budget);
    if (!found) {
        std::cerr << "error: no discontinuity witness within the step budget\n";
        return kExitBudget;
    }
    Rational side_eps = rec.p * rec.p / 2;
    Rational gap = discontinuity_gap(rec, found->witness, side_eps);
    Json out{{"witness", rat_str(found->witness)}, {"witness_dec", dec(found->witness)},
             {"steps", found->steps},              {"gap", rat_str(gap)},
             {"gap_dec", dec(gap)}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified analysis of recursive coin-flip recurrences"};
    app.require_subcommand(1);

    RecChoice rc;
    std::string q_text = "1/2", eps_text = "1e-9";
    bool exact = false;
    std::size_t max_steps = kDefaultOrbitBudget;

    CLI::App* eval = app.add_subcommand("eval", "certified value of the bounded solution at q");
    add_rec_flags(eval, rc);
    eval->add_option("--q", q_text, "evaluation point");
    eval->add_option("--eps", eps_text, "enclosure width target");
    eval->add_flag("--exact", exact, "require the exact cycle-forced value");

    CLI::App* orbit = app.add_subcommand("orbit", "forward orbit and cycle detection");
    add_rec_flags(orbit, rc);
    orbit->add_option("--q", q_text, "starting point");
    orbit->add_option("--max-steps", max_steps, "orbit budget");

    std::string spec_name, spec_file, verify_p = "1/4", verify_c;
    std::vector<std::string> verify_configs;
    std::size_t verify_n = 1;
    CLI::App* verify = app.add_subcommand("verify", "run the coinduction rule on a property spec");
    verify->add_option("--spec", spec_name, "builtin:E1_le_E0 or builtin:pair_E3_le_E1");
    verify->add_option("--spec-file", spec_file, "JSON property spec");
    verify->add_option("--config", verify_configs, "recurrence config(s) for --spec-file");
    verify->add_option("--p", verify_p, "bias parameter");
    verify->add_option("--c", verify_c, "breakpoint for the pair spec's first recurrence");
    verify->add_option("--n", verify_n, "check preservation against the n-step operator");

    int variant = 1;
    std::uint64_t trials = 100000, seed = 1;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates of heads and flips");
    simulate->add_option("--variant", variant, "algorithm variant 0, 1 or 2");
    simulate->add_option("--p", rc.p_text, "bias parameter");
    simulate->add_option("--q", q_text, "target bias");
    simulate->add_option("--trials", trials, "number of trials");
    simulate->add_option("--seed", seed, "RNG seed");

    std::size_t plot_points = 256;
    std::string out_path;
    CLI::App* plot = app.add_subcommand("plot", "CSV of certified enclosures over a grid");
    add_rec_flags(plot, rc);
    plot->add_option("--points", plot_points, "uniform grid size");
    plot->add_option("--eps", eps_text, "enclosure width target");
    plot->add_option("--out", out_path, "output CSV path")->required();

    RecChoice rb;
    std::string q_list;
    CLI::App* compare = app.add_subcommand("compare", "certified per-point ordering of two strategies");
    compare->add_option("--a", rc.family, "first family")->required();
    compare->add_option("--b", rb.family, "second family")->required();
    compare->add_option("--p", rc.p_text, "bias parameter");
    compare->add_option("--c", rc.c_text, "breakpoint for E3 (applies to both sides)");
    compare->add_option("--points", plot_points, "uniform grid size");
    compare->add_option("--q-list", q_list, "comma-separated evaluation points");
    compare->add_option("--eps", eps_text, "enclosure width target");
    compare->add_option("--out", out_path, "output CSV path (default stdout)");

    std::string lo_text = "0", hi_text = "1";
    std::size_t disc_budget = 0;
    CLI::App* discont = app.add_subcommand("discont", "find a discontinuity witness in (lo, hi)");
    add_rec_flags(discont, rc);
    discont->add_option("--lo", lo_text, "interval lower end");
    discont->add_option("--hi", hi_text, "interval upper end");
    discont->add_option("--budget", disc_budget, "forward step budget (0 = automatic)");

    try {
        app.parse(argc, argv);
        if (eval->parsed()) return cmd_eval(rc, q_text, eps_text, exact);
        if (orbit->parsed()) return cmd_orbit(rc, q_text, max_steps);
        if (verify->parsed())
            return cmd_verify(spec_name, spec_file, verify_configs, verify_p, verify_c, verify_n);
        if (simulate->parsed()) return cmd_simulate(variant, rc.p_text, q_text, trials, seed);
        if (plot->parsed()) return cmd_plot(rc, plot_points, eps_text, out_path);
        if (compare->parsed()) {
            rb.p_text = rc.p_text;
            rb.c_text = rc.c_text;
            return cmd_compare(rc, rb, plot_points, q_list, eps_text, out_path);
        }
        if (discont->parsed()) return cmd_discont(rc, lo_text, hi_text, disc_budget);
        return kExitInput;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    } catch (const PieceExplosion& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const UnsupportedClauseCombination& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
