#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatlab/cli/config.hpp"
#include "heatlab/concavity/audit.hpp"
#include "heatlab/concavity/hot_approximation.hpp"
#include "heatlab/counterexample/construction.hpp"
#include "heatlab/counterexample/experiments.hpp"
#include "heatlab/heatflow/probe.hpp"
#include "heatlab/heatflow/semigroup.hpp"
#include "heatlab/heatflow/solver.hpp"

namespace heatlab::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr const char* kTimeseriesHeader =
    "# heatlab-timeseries v1: t,hess_log_u_e1e1,probe_error,sup_u,mass";

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvRow {
    double t = 0.0, hess = 0.0, err = 0.0, sup = 0.0, mass = 0.0;
};

inline std::string render_csv(const std::vector<CsvRow>& rows) {
    std::string out = std::string(kTimeseriesHeader) + "\n";
    out += "t,hess_log_u_e1e1,probe_error,sup_u,mass\n";
    for (const auto& r : rows) {
        out += fmt(r.t) + "," + fmt(r.hess) + "," + fmt(r.err) + "," +
               fmt(r.sup) + "," + fmt(r.mass) + "\n";
    }
    return out;
}

inline json audit_to_json(const AuditReport& rep) {
    return json{{"verdict", rep.pass ? "pass" : "fail"},
                {"min_slack", rep.min_slack},
                {"tolerance", rep.tolerance},
                {"samples", rep.samples},
                {"geodesic_failures", rep.geodesic_failures},
                {"witness",
                 {{"c0", {rep.witness.c0.xi1, rep.witness.c0.xi2}},
                  {"c1", {rep.witness.c1.xi1, rep.witness.c1.xi2}},
                  {"tau", rep.witness.tau},
                  {"values",
                   {rep.witness.value_c0, rep.witness.value_c1,
                    rep.witness.value_mid}}}}};
}

inline json conditions_to_json(const ConditionReport& c) {
    return json{{"pass", c.pass},
                {"c1_margin", c.c1_margin},
                {"c2", c.c2},
                {"c3_numeric", c.c3_numeric},
                {"c3_closed_form", c.c3_closed_form},
                {"c3_agreement", c.c3_agreement},
                {"det_first_derivative_max", c.det_first_derivative_max},
                {"det_second_derivative_min_signed",
                 c.det_second_derivative_min_signed},
                {"det_second_bound", c.det_second_bound},
                {"h11_second_max", c.h11_second_max},
                {"h1i_slope_max", c.h1i_slope_max},
                {"h1i_slope_bound", c.h1i_slope_bound}};
}

inline const char* verdict_name(BreakingVerdict v) {
    switch (v) {
        case BreakingVerdict::Broken: return "broken";
        case BreakingVerdict::NotBroken: return "not_broken";
        case BreakingVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

// Deterministic uniform draw; distribution helpers in <random> are not
// pinned across standard libraries.
inline double draw01(std::mt19937_64& rng) {
    return double(rng() >> 11) / 9007199254740992.0;
}

} // namespace detail

struct RunOutputs {
    json manifest;
    json report;
    std::vector<detail::CsvRow> timeseries;
    std::vector<std::pair<std::string, std::string>> plotdata;
    bool ok = true;
    std::string failed_stage;
};

// Runtime strictness: when set, solver invariant breaches abort the run at
// the breaching step instead of being recorded and judged at the end.
inline bool& strict_runtime() {
    static bool value = false;
    return value;
}

namespace detail {

inline void stage(RunOutputs& out, const std::string& name,
                  const std::string& status, const std::string& note = "") {
    out.manifest["stages"].push_back(
        json{{"name", name}, {"status", status}, {"note", note}});
    if (status == "failed") {
        out.ok = false;
        if (out.failed_stage.empty()) out.failed_stage = name;
    }
}

inline AuditOptions audit_options(const RunConfig& cfg) {
    AuditOptions opts;
    opts.seed = cfg.audit.seed;
    opts.tolerance_scale = cfg.audit.tolerance;
    opts.n_pairs = cfg.audit.n_pairs;
    return opts;
}

// ---- baseline_flat ---------------------------------------------------

inline void run_baseline_flat(const RunConfig& cfg, RunOutputs& out) {
    const double s = 0.5; // gaussian datum spread
    const double R = cfg.R > 0 ? cfg.R : 8.0;
    std::vector<double> checks = cfg.probe_times;
    if (checks.empty()) checks = {0.05, 0.1, 0.2};

    SolveOptions sopts;
    sopts.n_rho = cfg.n_rho;
    sopts.n_theta = cfg.n_theta;
    sopts.dt = cfg.dt;
    sopts.strict = strict_runtime();
    const PolarGrid grid(R, cfg.n_rho, cfg.n_theta);
    const double h_probe = 4.0 * grid.h_rho();
    sopts.observer = [&](double t, const ScalarGridField& field) {
        const auto pr = probe_hessian_log(field, 0.0, h_probe);
        out.timeseries.push_back({t, pr.value, pr.error, 0.0, 0.0});
    };
    auto phi = [s](const NormalPoint& p) {
        return std::exp(-p.rho() * p.rho() / (4 * s));
    };
    const auto sol = solve(ModelSurface::flat(std::max(32.0, 4 * R)), R, phi,
                           checks, sopts);
    for (std::size_t k = 0; k < out.timeseries.size() && k + 1 < sol.steps.size();
         ++k) {
        out.timeseries[k].sup = sol.steps[k + 1].sup;
        out.timeseries[k].mass = sol.steps[k + 1].mass;
    }
    detail::stage(out, "solve", "ok");

    json rows = json::array();
    bool all_within = true, all_negative = true;
    for (const auto& snap : sol.snapshots) {
        const auto pr = probe_hessian_log(snap, 0.0, h_probe);
        const double want = -1.0 / (2.0 * (s + snap.time));
        const double rel = std::abs(pr.value - want) / std::abs(want);
        all_within = all_within && rel <= 0.02;
        all_negative = all_negative && pr.value < 0.0;
        rows.push_back(json{{"t", snap.time},
                            {"probed", pr.value},
                            {"probe_error", pr.error},
                            {"expected", want},
                            {"relative_gap", rel}});
    }
    out.report["baseline"] = {{"gaussian_spread", s},
                              {"checks", rows},
                              {"within_2_percent", all_within},
                              {"stays_negative", all_negative},
                              {"max_principle_ok", sol.max_principle_ok},
                              {"monotone_decay_ok", sol.monotone_decay_ok}};
    out.manifest["derived"]["solve_radius"] = R;
    out.manifest["derived"]["dt"] = sol.dt;
    detail::stage(out, "probe_checks",
                  all_within && all_negative ? "ok" : "failed");
}

// ---- breaking ---------------------------------------------------------

inline json breaking_to_json(const BreakingResult& res) {
    return json{{"verdict", verdict_name(res.verdict)},
                {"t_broken", res.t_broken},
                {"initial_slope_closed_form", res.initial_slope},
                {"measured_early_slope", res.measured_slope},
                {"slope_agreement", res.slope_agreement},
                {"slope_ok", res.slope_ok},
                {"solve_radius", res.solve_radius},
                {"datum_cut_radius", res.cut_radius},
                {"probe_width", res.probe_width},
                {"max_principle_ok", res.solution.max_principle_ok},
                {"monotone_decay_ok", res.solution.monotone_decay_ok}};
}

inline void run_breaking(const RunConfig& cfg, RunOutputs& out) {
    const ModelSurface surface = cfg.surface();
    ConstructionOverrides over;
    over.C = cfg.C_override;
    over.lambda = cfg.lambda_override;
    over.delta = cfg.delta_override;

    CounterexampleSpec spec;
    try {
        spec = build_counterexample_spec(surface, over);
    } catch (const DegenerateCurvatureError& e) {
        detail::stage(out, "construction", "failed", e.what());
        out.report["breaking"] = {{"outcome", "degenerate_curvature"},
                                  {"detail", e.what()}};
        return;
    }
    out.manifest["derived"]["C"] = spec.C;
    out.manifest["derived"]["lambda"] = spec.lambda;
    out.manifest["derived"]["delta"] = spec.delta;
    out.manifest["derived"]["working_radius"] = spec.r;
    out.manifest["derived"]["I_plus_empty"] = spec.I_plus.empty();
    out.manifest["derived"]["lambda_quadratic"] = {{"A", spec.lambda_info.A},
                                                   {"B", spec.lambda_info.B},
                                                   {"D", spec.lambda_info.D}};
    detail::stage(out, "construction", "ok");

    const ConditionReport cond = verify_conditions(surface, spec);
    out.report["conditions"] = detail::conditions_to_json(cond);
    detail::stage(out, "verify_conditions", cond.pass ? "ok" : "failed");
    if (!cond.pass) return;

    BreakingOptions bopts;
    bopts.n_rho = cfg.n_rho;
    bopts.n_theta = cfg.n_theta;
    bopts.dt = cfg.dt;
    const BreakingResult res = breaking_experiment(surface, spec, bopts);
    out.manifest["derived"]["solve_radius"] = res.solve_radius;
    out.manifest["derived"]["datum_cut_radius"] = res.cut_radius;
    out.manifest["derived"]["dt"] = res.solution.dt;
    out.manifest["derived"]["mollification_radius"] =
        res.solution.mollification_radius;
    out.manifest["derived"]["probe_width"] = res.probe_width;

    for (const auto& p : res.series)
        out.timeseries.push_back({p.t, p.value, p.error, 0.0, 0.0});
    {
        std::size_t j = 0;
        for (const auto& d : res.solution.steps) {
            while (j < out.timeseries.size() &&
                   out.timeseries[j].t <= d.t + 1e-12 * (1 + d.t)) {
                if (std::abs(out.timeseries[j].t - d.t) <=
                    1e-9 * (1.0 + d.t)) {
                    out.timeseries[j].sup = d.sup;
                    out.timeseries[j].mass = d.mass;
                }
                ++j;
            }
        }
    }

    json rep = breaking_to_json(res);
    rep["t_bound"] = 0.1 * spec.delta * spec.delta;
    rep["within_t_bound"] = res.t_broken <= 0.1 * spec.delta * spec.delta;
    const bool base_ok = res.verdict == BreakingVerdict::Broken &&
                         res.slope_ok &&
                         res.t_broken <= 0.1 * spec.delta * spec.delta;
    detail::stage(out, "breaking_run", base_ok ? "ok" : "failed",
                  detail::verdict_name(res.verdict));

    if (cfg.refine_check) {
        BreakingOptions fine = bopts;
        fine.n_rho = 2 * bopts.n_rho;
        fine.n_theta = 2 * bopts.n_theta;
        fine.probe_stride = 4 * bopts.probe_stride;
        fine.dense_steps = 4 * bopts.dense_steps;
        const BreakingResult res2 = breaking_experiment(surface, spec, fine);
        rep["refined"] = breaking_to_json(res2);
        bool stable = res2.verdict == res.verdict;
        // Values at shared times must move by less than the error estimates.
        double worst_move = 0.0, worst_allowance = kInf;
        std::size_t matched = 0;
        for (const auto& a : res.series) {
            for (const auto& b : res2.series) {
                if (std::abs(a.t - b.t) <= 1e-9 * (1 + a.t)) {
                    ++matched;
                    const double move = std::abs(a.value - b.value);
                    const double allow = a.error + b.error;
                    if (move - allow > worst_move - worst_allowance) {
                        worst_move = move;
                        worst_allowance = allow;
                    }
                    if (move > allow) stable = false;
                }
            }
        }
        rep["refinement"] = {{"stable", stable},
                             {"matched_samples", matched},
                             {"worst_move", worst_move},
                             {"worst_allowance", worst_allowance}};
        detail::stage(out, "refinement_check", stable ? "ok" : "failed");
    }
    out.report["breaking"] = rep;
}

// ---- flat_obstruction --------------------------------------------------

inline void run_flat_obstruction(const RunConfig& cfg, RunOutputs& out) {
    (void)cfg;
    const ModelSurface flat = ModelSurface::flat();
    const auto curv = curvature_data(flat);
    const auto gammas = gamma_hessians(flat);
    const auto c = compute_C(curv, gammas);
    out.manifest["derived"]["C"] = c.C;

    bool degenerate = false;
    std::string message;
    try {
        choose_lambda(curv, c.C, gammas);
    } catch (const DegenerateCurvatureError& e) {
        degenerate = true;
        message = e.what();
    }
    detail::stage(out, "choose_lambda",
                  degenerate ? "ok" : "failed",
                  degenerate ? "degenerate curvature, as required" : "");

    const auto q = lambda_quadratic(curv, c.C, gammas);
    bool all_negative = true;
    json scan = json::array();
    for (int lam = 1; lam <= 1000; ++lam) {
        const double v = closed_form_c3(q, lam);
        all_negative = all_negative && v < 0.0;
        if (lam == 1 || lam % 100 == 0)
            scan.push_back(json{{"lambda", lam}, {"c3", v}});
    }
    // Numeric spot checks of the same functional through the covariant
    // operators.
    json spots = json::array();
    for (double lam : {1.0, 10.0, 100.0, 1000.0}) {
        const auto psi = build_psi(curv, c.C, lam);
        ScalarField f = [&](const NormalPoint& p) { return psi(p); };
        auto functional = [&](double x) {
            return laplace_beltrami(flat, f, {x, 0.0}) +
                   grad_norm_sq(flat, f, {x, 0.0});
        };
        const double numeric =
            numerics::second_derivative_richardson(functional, 0.0, 0.02).first;
        all_negative = all_negative && numeric < 0.0;
        spots.push_back(json{{"lambda", lam},
                             {"c3_numeric", numeric},
                             {"c3_closed_form", closed_form_c3(q, lam)}});
    }
    out.report["flat_obstruction"] = {{"outcome", degenerate
                                                      ? "degenerate_curvature"
                                                      : "unexpected"},
                                      {"detail", message},
                                      {"scan_all_negative", all_negative},
                                      {"scan", scan},
                                      {"numeric_spot_checks", spots}};
    detail::stage(out, "lambda_scan", all_negative ? "ok" : "failed");
    if (!degenerate) out.ok = false;
}

// ---- rescaling ----------------------------------------------------------

inline EuclideanDatum2D rescaling_datum() {
    return {[](double x1, double x2) {
                const double q =
                    (x1 / 0.9) * (x1 / 0.9) + (x2 / 0.7) * (x2 / 0.7);
                return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
            },
            0.95};
}

inline void run_rescaling(const RunConfig& cfg, RunOutputs& out) {
    const ModelSurface surface = cfg.surface();
    const auto psi_m = rescaling_datum();
    const std::vector<double> ladder = {2.0, 4.0, 8.0};

    RescalingOptions ropts;
    const auto floor_rungs =
        rescaling_experiment(ModelSurface::flat(), psi_m, {2.0}, ropts);
    const double floor = floor_rungs[0].sup_diff;
    out.manifest["derived"]["solver_floor"] = floor;
    detail::stage(out, "flat_floor", "ok");

    const auto rungs = rescaling_experiment(surface, psi_m, ladder, ropts);
    json rows = json::array();
    bool monotone = true;
    std::string plot = "# lambda sup_diff\n";
    for (std::size_t k = 0; k < rungs.size(); ++k) {
        rows.push_back(json{{"lambda", rungs[k].lambda},
                            {"sup_diff", rungs[k].sup_diff},
                            {"surface_radius", rungs[k].surface_radius}});
        plot += detail::fmt(rungs[k].lambda) + " " +
                detail::fmt(rungs[k].sup_diff) + "\n";
        if (k > 0 && rungs[k].sup_diff >= rungs[k - 1].sup_diff &&
            rungs[k].sup_diff > 3.0 * floor)
            monotone = false;
    }
    out.plotdata.emplace_back("rescaling.dat", plot);
    out.report["rescaling"] = {{"rungs", rows},
                               {"solver_floor", floor},
                               {"monotone_to_floor", monotone}};
    detail::stage(out, "ladder", monotone ? "ok" : "failed");
}

// ---- infinity_demo -------------------------------------------------------

inline void run_infinity_demo(const RunConfig& cfg, RunOutputs& out) {
    const AdmissibleFunction F =
        cfg.audit.F_kind == "hot" ? AdmissibleFunction::hot(cfg.audit.hot_a)
                                  : AdmissibleFunction::power(cfg.audit.alpha);
    InfinityDemoOptions opts;
    const auto cert = infinity_counterexample_demo(F, opts);
    out.report["certificate"] = {{"found", cert.found},
                                 {"y", cert.y},
                                 {"z", cert.z},
                                 {"tau", cert.tau},
                                 {"slack", cert.slack},
                                 {"scan_radius", cert.scan_radius}};
    detail::stage(out, "violation_search", cert.found ? "ok" : "failed");

    const auto control =
        infinity_counterexample_demo(AdmissibleFunction::power(0.0), opts);
    out.report["log_control"] = {{"found", control.found},
                                 {"min_slack", control.slack}};
    detail::stage(out, "log_control", control.found ? "failed" : "ok");

    EuclideanDatum1D psi{[&](double y) {
                             return (y >= -1 && y <= 1) ? opts.a_prime : 0.0;
                         },
                         -1.0, 1.0, true};
    const double at0 = euclidean_semigroup(psi, 1.0, 0.0);
    const double at10 = euclidean_semigroup(psi, 1.0, 10.0);
    out.report["vanishes_at_infinity"] = at0 > at10;
    detail::stage(out, "far_field", at0 > at10 ? "ok" : "failed");

    std::string plot = "# x evolved\n";
    for (int i = -48; i <= 48; ++i) {
        const double x = 0.25 * i;
        plot += detail::fmt(x) + " " +
                detail::fmt(euclidean_semigroup(psi, 1.0, x)) + "\n";
    }
    out.plotdata.emplace_back("evolved_indicator.dat", plot);
}

// ---- audit_suite ----------------------------------------------------------

inline void run_audit_suite(const RunConfig& cfg, RunOutputs& out) {
    const ModelSurface flat = ModelSurface::flat();
    AuditOptions opts = detail::audit_options(cfg);
    std::mt19937_64 rng(cfg.audit.seed * 0x9e3779b97f4a7c15ull + 1);

    const std::vector<double> alphas = {-2.0, -1.0, 0.0, 0.5, 1.0};
    json functions = json::array();
    int violations = 0;
    for (int k = 0; k < 20; ++k) {
        // Alternate smooth log-concave exponentials and compactly supported
        // power-concave plateaus.
        PointFunction f;
        std::string kind;
        if (k % 2 == 0) {
            const double a = 0.2 + draw01(rng), b = 0.2 + draw01(rng);
            const double c = 0.5 * draw01(rng);
            const double d = 0.6 * draw01(rng) - 0.3;
            const double e = 0.6 * draw01(rng) - 0.3;
            kind = "log_concave_exponential";
            f = [=](const NormalPoint& p) {
                const double x = p.xi1, y = p.xi2;
                return std::exp(-a * x * x - b * y * y - c * (x + y) * (x + y) +
                                d * x + e * y);
            };
        } else {
            const double gamma = (k % 4 == 1) ? 1.0 : 0.5;
            const double a = 0.4 + draw01(rng), b = 0.4 + draw01(rng);
            const double phi_rot = draw01(rng) * std::numbers::pi;
            const double scale = 0.5 + 0.5 * draw01(rng);
            kind = "power_concave_plateau";
            f = [=](const NormalPoint& p) {
                const double cx = std::cos(phi_rot), sx = std::sin(phi_rot);
                const double x = cx * p.xi1 + sx * p.xi2;
                const double y = -sx * p.xi1 + cx * p.xi2;
                const double q = a * x * x + b * y * y;
                return q >= 1.0 ? 0.0 : scale * std::pow(1.0 - q, 1.0 / gamma);
            };
        }
        std::vector<bool> passes;
        for (double alpha : alphas)
            passes.push_back(
                audit_domain(f, AdmissibleFunction::power(alpha), flat, 1.0,
                             opts)
                    .pass);
        const bool quasi =
            audit_extremes(f, ExtremeMode::Quasi, flat, 1.0, opts).pass;
        bool chain_ok = true;
        bool any_pass = false;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (!passes[i]) continue;
            any_pass = true;
            for (std::size_t j = 0; j < i; ++j)
                if (!passes[j]) chain_ok = false;
        }
        if (any_pass && !quasi) chain_ok = false;
        if (!chain_ok) ++violations;
        json row = {{"kind", kind}, {"quasi", quasi}, {"chain_ok", chain_ok}};
        for (std::size_t i = 0; i < alphas.size(); ++i)
            row["alpha_" + std::to_string(alphas[i])] = passes[i];
        functions.push_back(row);
    }
    out.report["hierarchy"] = {{"functions", functions},
                               {"violations", violations}};
    detail::stage(out, "hierarchy", violations == 0 ? "ok" : "failed");

    // Hot-function checks.
    json hot;
    const auto H1 = AdmissibleFunction::hot(1.0);
    const double at_half = H1(0.5);
    hot["H_half"] = at_half;
    const double spot = H1(0.841345);
    hot["H_spot"] = spot;
    double roundtrip_worst = 0.0;
    for (double r : {1e-6, 0.05, 0.3, 0.5, 0.77, 0.999}) {
        const double back = H1.inverse(H1(r));
        roundtrip_worst =
            std::max(roundtrip_worst, std::abs(back - r) / std::max(r, 1e-30));
    }
    hot["roundtrip_worst_rel"] = roundtrip_worst;
    const bool hot_spot_ok = std::abs(at_half) <= 1e-10 &&
                             std::abs(spot - 1.414214) <= 1e-5 &&
                             roundtrip_worst <= 1e-10;
    detail::stage(out, "hot_spot_values", hot_spot_ok ? "ok" : "failed");

    auto bump = [](const NormalPoint& p) {
        return std::exp(-0.8 * p.rho() * p.rho());
    };
    json ladder = json::array();
    double prev = kInf;
    bool decreasing = true, rescale_ok = true;
    double prev_a = 0.0;
    PointFunction prev_g;
    for (double a : {10.0, 100.0, 1000.0}) {
        const auto approx = hot_approximation(bump, flat, 1.0, a, opts);
        ladder.push_back(json{{"a", a},
                              {"sup_error", approx.sup_error},
                              {"alpha", approx.alpha},
                              {"beta", approx.beta},
                              {"audit_pass", approx.audit.pass}});
        decreasing = decreasing && approx.sup_error < prev;
        if (prev_g) {
            const auto rc =
                hot_rescale_check(approx.g, a, prev_a, flat, 1.0, opts);
            rescale_ok = rescale_ok && rc.pass;
        }
        prev = approx.sup_error;
        prev_a = a;
        prev_g = approx.g;
    }
    hot["approximation_ladder"] = ladder;
    hot["sup_error_strictly_decreasing"] = decreasing;
    hot["rescale_checks_pass"] = rescale_ok;
    out.report["hot"] = hot;
    detail::stage(out, "hot_ladder",
                  decreasing && rescale_ok ? "ok" : "failed");
}

} // namespace detail

inline RunOutputs execute(const RunConfig& cfg) {
    RunOutputs out;
    out.manifest["artifact_version"] = kArtifactVersion;
    out.manifest["experiment"] = to_string(cfg.experiment);
    out.manifest["config"] = {
        {"surface", {{"kind", cfg.surface_kind}, {"K", cfg.K}}},
        {"grid", {{"n_rho", cfg.n_rho}, {"n_theta", cfg.n_theta}}},
        {"seed", cfg.audit.seed},
    };
    out.manifest["stages"] = json::array();

    const auto t0 = std::chrono::steady_clock::now();
    switch (cfg.experiment) {
        case Experiment::BaselineFlat: detail::run_baseline_flat(cfg, out); break;
        case Experiment::Breaking: detail::run_breaking(cfg, out); break;
        case Experiment::FlatObstruction:
            detail::run_flat_obstruction(cfg, out);
            break;
        case Experiment::Rescaling: detail::run_rescaling(cfg, out); break;
        case Experiment::InfinityDemo: detail::run_infinity_demo(cfg, out); break;
        case Experiment::AuditSuite: detail::run_audit_suite(cfg, out); break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    out.manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(t1 - t0).count();

    json summary = json::array();
    for (const auto& s : out.manifest["stages"])
        summary.push_back(s.at("name").get<std::string>() + ":" +
                          s.at("status").get<std::string>());
    out.manifest["invariant_summary"] = summary;
    return out;
}

inline void write_outputs(const RunOutputs& out, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream f(dir + "/manifest.json");
        f << out.manifest.dump(2) << "\n";
    }
    {
        std::ofstream f(dir + "/report.json");
        f << out.report.dump(2) << "\n";
    }
    {
        std::ofstream f(dir + "/timeseries.csv");
        f << detail::render_csv(out.timeseries);
    }
    if (!out.plotdata.empty()) {
        fs::create_directories(dir + "/plotdata");
        for (const auto& [name, content] : out.plotdata) {
            std::ofstream f(dir + "/plotdata/" + name);
            f << content;
        }
    }
}

// Dry-run plan: the cheap algebra resolved, no PDE work.
inline json describe(const RunConfig& cfg) {
    json plan;
    plan["experiment"] = to_string(cfg.experiment);
    plan["surface"] = {{"kind", cfg.surface_kind}, {"K", cfg.K}};
    const ModelSurface surface = cfg.surface();
    if (cfg.experiment == Experiment::Breaking ||
        cfg.experiment == Experiment::FlatObstruction) {
        const auto curv = curvature_data(surface);
        const auto gammas = gamma_hessians(surface);
        const auto c = compute_C(curv, gammas);
        plan["C"] = cfg.C_override.value_or(c.C);
        plan["C_binding"] =
            c.curvature_binding ? "curvature_components" : "connection_hessian";
        plan["I_plus_empty"] = curv.i_plus().empty();
        if (curv.i_plus().empty() && surface.kind == SurfaceKind::Hyperbolic)
            plan["note"] = "I_plus is empty: negative-curvature branch";
        try {
            const auto q = choose_lambda(curv, plan["C"].get<double>(), gammas);
            const double lambda = cfg.lambda_override.value_or(q.lambda);
            plan["lambda"] = lambda;
            plan["c3_closed_form"] = closed_form_c3(q, lambda);
            const auto psi =
                build_psi(curv, plan["C"].get<double>(), lambda);
            const double delta = cfg.delta_override.value_or(
                choose_delta(surface, psi, 0.9 * surface.convexity_radius()));
            plan["delta"] = delta;
            const double cut = std::min(delta, 10.0 / lambda);
            const double R = std::min(2.0 * cut, 0.95 * surface.chart_radius);
            const double h = R / cfg.n_rho;
            const double dt = cfg.dt > 0 ? cfg.dt : 0.25 * h * h;
            const double t_max =
                std::min(1.0 / (lambda * lambda), 0.1 * cut * cut);
            plan["solve_radius"] = R;
            plan["estimated_cells"] = 1 + (cfg.n_rho - 1) * cfg.n_theta;
            plan["estimated_steps"] = static_cast<long>(t_max / dt) + 1;
        } catch (const DegenerateCurvatureError& e) {
            plan["note"] = std::string("degenerate curvature: ") + e.what();
        }
    } else {
        plan["estimated_cells"] = 1 + (cfg.n_rho - 1) * cfg.n_theta;
    }
    return plan;
}

} // namespace heatlab::cli
