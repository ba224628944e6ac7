#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "heatlab/concavity/admissible.hpp"
#include "heatlab/counterexample/construction.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/heatflow/probe.hpp"
#include "heatlab/heatflow/semigroup.hpp"
#include "heatlab/heatflow/solver.hpp"

namespace heatlab {

enum class BreakingVerdict { Broken, NotBroken, Inconclusive };

struct ProbeSample {
    double t = 0.0;
    double value = 0.0;
    double error = 0.0;
};

struct BreakingResult {
    std::vector<ProbeSample> series;
    BreakingVerdict verdict = BreakingVerdict::Inconclusive;
    double t_broken = 0.0;          // first time the signal clears 3x error
    double initial_slope = 0.0;     // closed-form growth rate at t = 0
    double measured_slope = 0.0;    // linear fit over the early window
    double slope_agreement = 0.0;   // relative gap, when a slope was fitted
    bool slope_ok = false;
    double solve_radius = 0.0;
    double delta = 0.0;             // certified concavity radius
    double cut_radius = 0.0;        // datum cut used by the run
    double probe_width = 0.0;
    HeatSolution solution;          // surface-flow diagnostics
};

struct BreakingOptions {
    int n_rho = 256;
    int n_theta = 64;
    double dt = 0.0;             // 0: default 0.25 h_rho^2
    double probe_cells = 4.0;    // probe width in grid cells at n_rho = 256
    int probe_stride = 4;        // probe cadence after the dense early phase
    int dense_steps = 64;        // leading steps probed at every step
    int startup_backward_euler_steps = 2;
    int verdict_skip_samples = 4; // startup samples excluded from the verdict
    // Pipeline-only knobs, in units of the datum's transverse width 1/lambda:
    double datum_cut_widths = 10.0; // datum cut radius
    double scan_window = 1.0;       // t_max in units of 1/lambda^2
    double slope_fit_window = 0.02; // slope-fit end, same units
};

namespace detail {

struct RawProbeSeries {
    std::vector<double> times;
    std::vector<RawSecondDiff> probes;
};

inline std::vector<ProbeSample> composite_series(
    const detail::RawProbeSeries& surf, const detail::RawProbeSeries& flat,
    const std::function<RawSecondDiff(double)>& reference) {
    if (surf.times.size() != flat.times.size())
        throw NumericalError("probe series of the two flows misaligned",
                             double(surf.times.size()) -
                                 double(flat.times.size()));
    std::vector<ProbeSample> out;
    out.reserve(surf.times.size());
    for (std::size_t k = 0; k < surf.times.size(); ++k) {
        const double t = surf.times[k];
        RawSecondDiff composite = reference(t);
        composite += surf.probes[k];
        composite -= flat.probes[k];
        const ProbeResult pr = composite.richardson();
        out.push_back({t, pr.value, pr.error});
    }
    return out;
}

} // namespace detail

// Probes Hess log u(e1,e1) at the base point with a flat control variate:
// the same datum is marched on the same grid under the flat operator, the
// discrete probes are differenced (cancelling the shared discretization
// artifacts), and the exact Euclidean part is restored by quadrature. An
// embedded half-resolution pair supplies the solver-error component of the
// per-sample error estimate. The composite is a falsifiable estimate of the
// surface-flow log-Hessian: broken needs it to clear three times its own
// error estimate.
inline BreakingResult probe_breaking_series(
    const ModelSurface& surface, double solve_radius,
    const std::function<double(const NormalPoint&)>& phi,
    const EuclideanDatum2D& euclid_datum, std::optional<double> jump_radius,
    double t_max, const BreakingOptions& opts) {
    BreakingResult out;
    out.solve_radius = solve_radius;
    // One probe stencil for both resolution levels,: at least 3.5 cells of
    // the coarse grid.
    const double h_probe =
        solve_radius *
        std::max(opts.probe_cells / 256.0, 3.5 / (opts.n_rho / 2));
    out.probe_width = h_probe;
    const ModelSurface flat_reference =
        ModelSurface::flat(std::max(32.0, 4.0 * solve_radius));

    auto march = [&](const ModelSurface& on, int n_rho, int n_theta, double dt,
                     int dense, int stride, detail::RawProbeSeries& rec,
                     HeatSolution* keep) {
        int step = 0;
        SolveOptions local;
        local.n_rho = n_rho;
        local.n_theta = n_theta;
        local.dt = dt;
        local.jump_radius = jump_radius;
        local.startup_backward_euler_steps = opts.startup_backward_euler_steps;
        local.observer = [&](double t, const ScalarGridField& field) {
            ++step;
            if (step > dense && step % stride != 0) return;
            try {
                rec.times.push_back(t);
                rec.probes.push_back(raw_log_second_diff(field, 0.0, h_probe));
            } catch (const ProbeError&) {
                rec.times.pop_back();
            }
        };
        HeatSolution sol = solve(on, solve_radius, phi, {t_max}, local);
        if (keep) *keep = std::move(sol);
    };

    const PolarGrid fine_grid(solve_radius, opts.n_rho, opts.n_theta);
    const double dt_fine =
        opts.dt > 0 ? opts.dt : 0.25 * fine_grid.h_rho() * fine_grid.h_rho();
    const int nr_c = std::max(32, opts.n_rho / 2);
    const int nt_c = std::max(64, opts.n_theta / 2);
    const double dt_c = 4.0 * dt_fine; // coarse times land on 4th fine steps
    const int dense_c = std::max(1, opts.dense_steps / 4);
    const int stride_c = std::max(1, opts.probe_stride / 4);
    const bool flat_run = surface.kind == SurfaceKind::Flat;

    detail::RawProbeSeries surf_f, flat_f, surf_c, flat_c;
    march(surface, opts.n_rho, opts.n_theta, dt_fine, opts.dense_steps,
          opts.probe_stride, surf_f, &out.solution);
    march(surface, nr_c, nt_c, dt_c, dense_c, stride_c, surf_c, nullptr);
    if (flat_run) {
        flat_f = surf_f;
        flat_c = surf_c;
    } else {
        march(flat_reference, opts.n_rho, opts.n_theta, dt_fine,
              opts.dense_steps, opts.probe_stride, flat_f, nullptr);
        march(flat_reference, nr_c, nt_c, dt_c, dense_c, stride_c, flat_c,
              nullptr);
    }

    // The Euclidean reference is grid-independent; cache it by time.
    std::vector<std::pair<double, RawSecondDiff>> ref_cache;
    auto reference = [&](double t) -> RawSecondDiff {
        for (const auto& [tc, probe] : ref_cache)
            if (std::abs(tc - t) <= 1e-9 * (1.0 + t)) return probe;
        const RawSecondDiff probe = raw_log_second_diff(
            [&](double x) { return euclidean_semigroup(euclid_datum, t, x, 0.0); },
            h_probe);
        ref_cache.emplace_back(t, probe);
        return probe;
    };

    out.series = detail::composite_series(surf_f, flat_f, reference);
    const std::vector<ProbeSample> coarse =
        detail::composite_series(surf_c, flat_c, reference);

    // Error estimate per sample: Richardson spread of the stencil plus a
    // solver-error term from the half-resolution pair (second-order scheme:
    // |fine - coarse| is about three times the fine-level error).
    {
        std::size_t jc = 0;
        double solver_err = coarse.empty() ? 0.0 : kInf;
        for (auto& s : out.series) {
            while (jc < coarse.size() &&
                   coarse[jc].t <= s.t + 1e-9 * (1.0 + s.t)) {
                // locate the matching fine sample by time
                for (const auto& f : out.series)
                    if (std::abs(f.t - coarse[jc].t) <= 1e-9 * (1.0 + f.t)) {
                        solver_err =
                            std::abs(f.value - coarse[jc].value) / 3.0;
                        break;
                    }
                ++jc;
            }
            if (std::isfinite(solver_err)) s.error += solver_err;
            else s.error += std::abs(s.value); // before any coarse sample
        }
    }

    if (out.series.empty()) {
        out.verdict = BreakingVerdict::Inconclusive;
        return out;
    }

    out.verdict = BreakingVerdict::NotBroken;
    const std::size_t skip =
        std::min<std::size_t>(opts.verdict_skip_samples, out.series.size());
    for (std::size_t k = skip; k < out.series.size(); ++k) {
        const auto& s = out.series[k];
        if (s.value > 3.0 * s.error) {
            out.verdict = BreakingVerdict::Broken;
            out.t_broken = s.t;
            break;
        }
    }
    if (out.verdict == BreakingVerdict::NotBroken) {
        for (std::size_t k = skip; k < out.series.size(); ++k)
            if (out.series[k].value > out.series[k].error) {
                out.verdict = BreakingVerdict::Inconclusive;
                break;
            }
    }
    return out;
}

// The end-to-end breaking run for a constructed spec. The datum is cut a few
// transverse widths from the base point: concavity certified on the delta
// ball holds there a fortiori, and the grid then resolves the datum at every
// lambda, which the full delta ball would not allow at fixed n_rho.
inline BreakingResult breaking_experiment(const ModelSurface& surface,
                                          const CounterexampleSpec& spec,
                                          const BreakingOptions& opts = {}) {
    const ConditionReport cond = verify_conditions(surface, spec);
    if (!cond.pass)
        throw PreconditionError("breaking run requires verified conditions");

    const double lam = spec.lambda;
    const double cut =
        std::min(spec.delta, opts.datum_cut_widths / lam);
    const double R = std::min(2.0 * cut, 0.95 * surface.chart_radius);
    const double t_max =
        std::min(opts.scan_window / (lam * lam), 0.1 * cut * cut);
    auto phi = [&](const NormalPoint& p) {
        return p.rho() < cut ? std::exp(spec.psi(p)) : 0.0;
    };
    const PsiPoly psi = spec.psi;
    const EuclideanDatum2D datum{
        [psi, cut](double x1, double x2) {
            return std::hypot(x1, x2) < cut
                       ? std::exp(psi(NormalPoint{x1, x2}))
                       : 0.0;
        },
        cut};

    BreakingResult out =
        probe_breaking_series(surface, R, phi, datum, cut, t_max, opts);
    out.delta = spec.delta;
    out.cut_radius = cut;
    out.initial_slope = closed_form_c3(spec.lambda_info, spec.lambda);

    // Early-window slope of the probe series against the closed form. The
    // series bends quadratically on the 1/lambda^2 time scale, so the slope
    // at zero comes from a quadratic fit with the bend absorbed.
    std::vector<double> ts, vs;
    const double w = opts.slope_fit_window / (lam * lam);
    const std::size_t skip =
        std::min<std::size_t>(opts.verdict_skip_samples, out.series.size());
    for (std::size_t k = skip; k < out.series.size(); ++k) {
        if (out.series[k].t > w) break;
        ts.push_back(out.series[k].t);
        vs.push_back(out.series[k].value);
    }
    if (ts.size() >= 5) {
        out.measured_slope = numerics::fit_quadratic(ts, vs).c1;
        out.slope_agreement = std::abs(out.measured_slope - out.initial_slope) /
                              std::max(std::abs(out.initial_slope), 1e-30);
        out.slope_ok = out.slope_agreement <= 0.20;
    }
    return out;
}

struct ViolationCertificate {
    bool found = false;
    double y = 0.0, z = 0.0, tau = 0.0;
    double slack = 0.0;
    double scan_radius = 0.0;
};

struct InfinityDemoOptions {
    double a_prime = 1.0;     // indicator height, must stay below sup F domain
    double scan_radius = 10.0;
    int scan_points = 41;
    std::vector<double> taus = {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};
    double slack_tol = 1e-3; // violations must clear this margin
};

// Evolves the 1D ball indicator for unit time and scans chords for a
// violation of the F-midpoint inequality. For admissible F with a finite
// limit at zero the far field must produce one; failing to find it signals
// an implementation bug, not a mathematical possibility.
inline ViolationCertificate infinity_counterexample_demo(
    const AdmissibleFunction& F, const InfinityDemoOptions& opts = {}) {
    if (!(opts.a_prime > 0) || opts.a_prime >= F.domain_sup())
        throw AdmissibilityError("indicator height outside [0, a)");

    const double ap = opts.a_prime;
    EuclideanDatum1D psi{[ap](double y) {
                             return (y >= -1.0 && y <= 1.0) ? ap : 0.0;
                         },
                         -1.0, 1.0, true};
    auto evolved = [&](double x) { return euclidean_semigroup(psi, 1.0, x); };

    ViolationCertificate best;
    best.scan_radius = opts.scan_radius;
    std::vector<double> xs(opts.scan_points), vs(opts.scan_points);
    for (int i = 0; i < opts.scan_points; ++i) {
        xs[i] = -opts.scan_radius +
                2.0 * opts.scan_radius * i / (opts.scan_points - 1);
        vs[i] = evolved(xs[i]);
    }
    for (int i = 0; i < opts.scan_points; ++i) {
        for (int j = i + 1; j < opts.scan_points; ++j) {
            const double Fy = F(vs[i]);
            const double Fz = F(vs[j]);
            if (Fy == -kInf || Fz == -kInf) continue;
            for (double tau : opts.taus) {
                const double m = (1 - tau) * xs[i] + tau * xs[j];
                const double Fm = F(evolved(m));
                const double slack =
                    (Fm == -kInf) ? -kInf
                                  : Fm - ((1 - tau) * Fy + tau * Fz);
                if (slack < best.slack) {
                    best.slack = slack;
                    best.y = xs[i];
                    best.z = xs[j];
                    best.tau = tau;
                }
            }
        }
    }
    best.found = best.slack < -opts.slack_tol;
    if (!best.found && F.finite_limit_at_zero())
        throw SearchFailure(
            "no chord violation found within the scan radius " +
            std::to_string(opts.scan_radius));
    return best;
}

struct RescalingRung {
    double lambda = 0.0;
    double sup_diff = 0.0;
    double surface_radius = 0.0;
};

struct RescalingOptions {
    double boundary_x_radius = 6.0; // Dirichlet ring, in rescaled units
    double compare_x_radius = 1.0;
    std::vector<double> compare_times = {0.125, 0.25, 0.375, 0.5};
    int n_rho_per_unit = 48; // rescaled-resolution: h_x = 1/n_rho_per_unit
    int n_theta = 128;
    int n_steps = 512;
    int compare_radii = 4;
    int compare_angles = 8;
};

// Shrinks a fixed Euclidean datum into the chart, solves the surface flow,
// undoes the parabolic rescaling, and measures the sup-distance to the
// Euclidean semigroup on a fixed compact. The surface ball is fixed in
// rescaled units so every rung carries the same discretization floor and the
// curvature contribution alone decays along the ladder.
inline std::vector<RescalingRung> rescaling_experiment(
    const ModelSurface& surface, const EuclideanDatum2D& psi_m,
    const std::vector<double>& lambdas, const RescalingOptions& opts = {}) {
    if (!(psi_m.support_radius > 0) ||
        psi_m.support_radius > 0.5 * opts.boundary_x_radius)
        throw ChartDomainError("datum support too large for the solve ball");

    std::vector<RescalingRung> out;
    for (double lambda : lambdas) {
        if (!(lambda > 1.0))
            throw ChartDomainError("rescaling ladder needs lambda > 1");
        RescalingRung rung;
        rung.lambda = lambda;
        rung.surface_radius = opts.boundary_x_radius / lambda;
        if (rung.surface_radius >= 0.98 * surface.chart_radius)
            throw ChartDomainError("ladder exits the chart guard");

        auto phi = [&](const NormalPoint& p) {
            return psi_m.f(lambda * p.xi1, lambda * p.xi2);
        };
        SolveOptions sopts;
        sopts.n_rho = static_cast<int>(
            std::lround(opts.n_rho_per_unit * opts.boundary_x_radius));
        sopts.n_theta = opts.n_theta;
        const double t_end = opts.compare_times.back() / (lambda * lambda);
        sopts.dt = t_end / opts.n_steps;
        std::vector<double> snap_times;
        for (double T : opts.compare_times)
            snap_times.push_back(T / (lambda * lambda));
        const auto sol =
            solve(surface, rung.surface_radius, phi, snap_times, sopts);

        for (std::size_t k = 0; k < opts.compare_times.size(); ++k) {
            const double T = opts.compare_times[k];
            const auto& snap = sol.snapshots[k];
            for (int ir = 0; ir <= opts.compare_radii; ++ir) {
                const double r_x =
                    opts.compare_x_radius * ir / opts.compare_radii;
                const int n_ang = ir == 0 ? 1 : opts.compare_angles;
                for (int ia = 0; ia < n_ang; ++ia) {
                    const double ang = 2 * std::numbers::pi * ia / n_ang + 0.2;
                    const double x1 = r_x * std::cos(ang);
                    const double x2 = r_x * std::sin(ang);
                    const double rescaled =
                        interpolate(snap, r_x / lambda, std::atan2(x2, x1));
                    const double euclid =
                        euclidean_semigroup(psi_m, T, x1, x2);
                    rung.sup_diff = std::max(rung.sup_diff,
                                             std::abs(rescaled - euclid));
                }
            }
        }
        out.push_back(rung);
    }
    return out;
}

} // namespace heatlab
