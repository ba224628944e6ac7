#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/geometry/model_surface.hpp"

namespace heatlab::cli {

using nlohmann::json;

enum class Experiment {
    BaselineFlat,
    Breaking,
    FlatObstruction,
    Rescaling,
    InfinityDemo,
    AuditSuite,
};

inline std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::BaselineFlat: return "baseline_flat";
        case Experiment::Breaking: return "breaking";
        case Experiment::FlatObstruction: return "flat_obstruction";
        case Experiment::Rescaling: return "rescaling";
        case Experiment::InfinityDemo: return "infinity_demo";
        case Experiment::AuditSuite: return "audit_suite";
    }
    return "?";
}

struct AuditConfig {
    std::string F_kind = "power"; // power | hot
    double alpha = 0.0;
    double hot_a = 10.0;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    int n_pairs = 64;
};

// Flat, typed key tree; unknown keys are errors so parameter drift cannot
// hide behind silent defaults.
struct RunConfig {
    Experiment experiment = Experiment::BaselineFlat;
    std::string surface_kind = "flat";
    double K = 0.0;
    double R = 0.0; // 0: experiment-specific default
    std::optional<double> delta_override;
    int n_rho = 256;
    int n_theta = 64;
    bool refine_check = true;
    double dt = 0.0;    // 0: 0.25 h^2
    double t_max = 0.0; // 0: experiment-specific default
    std::vector<double> probe_times;
    std::optional<double> C_override;
    std::optional<double> lambda_override;
    AuditConfig audit;
    std::string output_dir = "out";

    ModelSurface surface() const {
        if (surface_kind == "flat") return ModelSurface::flat();
        if (surface_kind == "sphere") return ModelSurface::sphere(K);
        if (surface_kind == "hyperbolic") return ModelSurface::hyperbolic(K);
        throw UsageError("surface.kind", "unknown surface kind");
    }
};

namespace detail {

inline void require_keys(const json& node, const std::string& path,
                         const std::set<std::string>& allowed) {
    if (!node.is_object())
        throw UsageError(path, "expected an object");
    for (const auto& [key, value] : node.items())
        if (!allowed.count(key))
            throw UsageError(path + "." + key, "unknown key");
}

inline double positive(const json& node, const std::string& path,
                       bool allow_zero = false) {
    if (!node.is_number())
        throw UsageError(path, "expected a number");
    const double v = node.get<double>();
    if (v < 0.0 || (!allow_zero && v == 0.0))
        throw UsageError(path, "must be positive");
    return v;
}

} // namespace detail

inline RunConfig parse_config(const json& root) {
    detail::require_keys(root, "config",
                         {"experiment", "surface", "domain", "grid", "time",
                          "construction", "audit", "output_dir"});
    RunConfig cfg;

    if (!root.contains("experiment"))
        throw UsageError("experiment", "missing");
    const std::string exp = root.at("experiment").get<std::string>();
    if (exp == "baseline_flat") cfg.experiment = Experiment::BaselineFlat;
    else if (exp == "breaking") cfg.experiment = Experiment::Breaking;
    else if (exp == "flat_obstruction")
        cfg.experiment = Experiment::FlatObstruction;
    else if (exp == "rescaling") cfg.experiment = Experiment::Rescaling;
    else if (exp == "infinity_demo") cfg.experiment = Experiment::InfinityDemo;
    else if (exp == "audit_suite") cfg.experiment = Experiment::AuditSuite;
    else throw UsageError("experiment", "unknown experiment '" + exp + "'");

    if (root.contains("surface")) {
        const auto& s = root.at("surface");
        detail::require_keys(s, "surface", {"kind", "K"});
        if (s.contains("kind")) cfg.surface_kind = s.at("kind").get<std::string>();
        if (s.contains("K")) cfg.K = s.at("K").get<double>();
        if (cfg.surface_kind == "flat" && cfg.K != 0.0)
            throw UsageError("surface.K", "flat surface requires K = 0");
        if (cfg.surface_kind == "sphere" && !(cfg.K > 0))
            throw UsageError("surface.K", "sphere requires K > 0");
        if (cfg.surface_kind == "hyperbolic" && !(cfg.K < 0))
            throw UsageError("surface.K", "hyperbolic requires K < 0");
    }

    if (root.contains("domain")) {
        const auto& d = root.at("domain");
        detail::require_keys(d, "domain", {"R", "delta_override"});
        if (d.contains("R")) cfg.R = detail::positive(d.at("R"), "domain.R", true);
        if (d.contains("delta_override"))
            cfg.delta_override =
                detail::positive(d.at("delta_override"), "domain.delta_override");
    }

    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        detail::require_keys(g, "grid", {"n_rho", "n_theta", "refine_check"});
        if (g.contains("n_rho")) cfg.n_rho = g.at("n_rho").get<int>();
        if (g.contains("n_theta")) cfg.n_theta = g.at("n_theta").get<int>();
        if (g.contains("refine_check"))
            cfg.refine_check = g.at("refine_check").get<bool>();
        if (cfg.n_rho < 32) throw UsageError("grid.n_rho", "must be >= 32");
        if (cfg.n_theta < 64 || cfg.n_theta % 4 != 0)
            throw UsageError("grid.n_theta", "must be >= 64, multiple of 4");
    }

    if (root.contains("time")) {
        const auto& t = root.at("time");
        detail::require_keys(t, "time", {"dt", "t_max", "probe_times"});
        if (t.contains("dt")) cfg.dt = detail::positive(t.at("dt"), "time.dt", true);
        if (t.contains("t_max"))
            cfg.t_max = detail::positive(t.at("t_max"), "time.t_max", true);
        if (t.contains("probe_times"))
            for (std::size_t i = 0; i < t.at("probe_times").size(); ++i)
                cfg.probe_times.push_back(detail::positive(
                    t.at("probe_times")[i],
                    "time.probe_times[" + std::to_string(i) + "]"));
    }

    if (root.contains("construction")) {
        const auto& c = root.at("construction");
        detail::require_keys(c, "construction", {"C_override", "lambda_override"});
        if (c.contains("C_override"))
            cfg.C_override =
                detail::positive(c.at("C_override"), "construction.C_override");
        if (c.contains("lambda_override"))
            cfg.lambda_override = detail::positive(c.at("lambda_override"),
                                                   "construction.lambda_override");
    }

    if (root.contains("audit")) {
        const auto& a = root.at("audit");
        detail::require_keys(a, "audit", {"F", "seed", "tolerance", "n_pairs"});
        if (a.contains("F")) {
            const auto& f = a.at("F");
            detail::require_keys(f, "audit.F", {"kind", "alpha", "a"});
            if (f.contains("kind"))
                cfg.audit.F_kind = f.at("kind").get<std::string>();
            if (cfg.audit.F_kind != "power" && cfg.audit.F_kind != "hot")
                throw UsageError("audit.F.kind", "must be 'power' or 'hot'");
            if (f.contains("alpha")) cfg.audit.alpha = f.at("alpha").get<double>();
            if (f.contains("a"))
                cfg.audit.hot_a = detail::positive(f.at("a"), "audit.F.a");
        }
        if (a.contains("seed")) cfg.audit.seed = a.at("seed").get<std::uint64_t>();
        if (a.contains("tolerance"))
            cfg.audit.tolerance =
                detail::positive(a.at("tolerance"), "audit.tolerance");
        if (a.contains("n_pairs")) {
            cfg.audit.n_pairs = a.at("n_pairs").get<int>();
            if (cfg.audit.n_pairs < 4)
                throw UsageError("audit.n_pairs", "must be >= 4");
        }
    }

    if (root.contains("output_dir"))
        cfg.output_dir = root.at("output_dir").get<std::string>();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config", "cannot open '" + path + "'");
    json root;
    try {
        in >> root;
    } catch (const json::parse_error& e) {
        throw UsageError("config", std::string("parse error: ") + e.what());
    }
    return parse_config(root);
}

} // namespace heatlab::cli
