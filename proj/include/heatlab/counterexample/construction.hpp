#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/errors.hpp"
#include "heatlab/geometry/curvature.hpp"
#include "heatlab/geometry/differential_ops.hpp"
#include "heatlab/geometry/model_surface.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

// The breaking seed function: a quartic polynomial in the chart coordinates
// whose covariant Hessian is flat in the e1 direction at the base point while
// the convexity functional it feeds grows quadratically in lambda. Value,
// gradient, and coordinate Hessian are analytic.
class PsiPoly {
  public:
    PsiPoly() = default;
    PsiPoly(Eigen::VectorXd kappa, std::vector<int> i_plus, double C,
            double lambda)
        : kappa_(std::move(kappa)), i_plus_(std::move(i_plus)), C_(C),
          lambda_(lambda), n_(static_cast<int>(kappa_.size())) {
        in_plus_.assign(n_, 0.0);
        for (int i : i_plus_) in_plus_[i] = 1.0;
    }

    int dim() const { return n_; }
    double C() const { return C_; }
    double lambda() const { return lambda_; }

    double value(const Eigen::VectorXd& xi) const {
        const double x = xi[0];
        double lin = 0, sq = 0, T = 0, Q = 0;
        for (int i = 1; i < n_; ++i) {
            lin += in_plus_[i] * xi[i];
            sq += xi[i] * xi[i];
            T += in_plus_[i] * kappa_[i] * xi[i];
            Q += in_plus_[i] * kappa_[i] * xi[i] * xi[i];
        }
        const double rho2 = xi.squaredNorm();
        return 2 * lambda_ * lin - lambda_ * lambda_ * sq +
               (2.0 / 3.0) * lambda_ * x * x * T -
               x * x * (C_ * (1 + lambda_) * rho2 + lambda_ * lambda_ * Q);
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& xi) const {
        const double x = xi[0];
        double T = 0, Q = 0;
        for (int i = 1; i < n_; ++i) {
            T += in_plus_[i] * kappa_[i] * xi[i];
            Q += in_plus_[i] * kappa_[i] * xi[i] * xi[i];
        }
        const double rho2 = xi.squaredNorm();
        const double c1l = C_ * (1 + lambda_);
        Eigen::VectorXd g(n_);
        g[0] = (4.0 / 3.0) * lambda_ * x * T -
               2 * x * (c1l * rho2 + lambda_ * lambda_ * Q) - 2 * c1l * x * x * x;
        for (int j = 1; j < n_; ++j) {
            const double kj = in_plus_[j] * kappa_[j];
            g[j] = 2 * lambda_ * in_plus_[j] - 2 * lambda_ * lambda_ * xi[j] +
                   (2.0 / 3.0) * lambda_ * x * x * kj -
                   2 * x * x * xi[j] * (c1l + lambda_ * lambda_ * kj);
        }
        return g;
    }

    Eigen::MatrixXd hessian(const Eigen::VectorXd& xi) const {
        const double x = xi[0];
        double T = 0, Q = 0;
        for (int i = 1; i < n_; ++i) {
            T += in_plus_[i] * kappa_[i] * xi[i];
            Q += in_plus_[i] * kappa_[i] * xi[i] * xi[i];
        }
        const double rho2 = xi.squaredNorm();
        const double c1l = C_ * (1 + lambda_);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_, n_);
        H(0, 0) = (4.0 / 3.0) * lambda_ * T -
                  2 * (c1l * rho2 + lambda_ * lambda_ * Q) - 10 * c1l * x * x;
        for (int j = 1; j < n_; ++j) {
            const double kj = in_plus_[j] * kappa_[j];
            H(0, j) = H(j, 0) = (4.0 / 3.0) * lambda_ * x * kj -
                                4 * x * xi[j] * (c1l + lambda_ * lambda_ * kj);
            H(j, j) = -2 * lambda_ * lambda_ -
                      2 * x * x * (c1l + lambda_ * lambda_ * kj);
        }
        return H;
    }

    // 2D chart access for the model-surface pipeline.
    double operator()(const NormalPoint& p) const {
        Eigen::Vector2d xi(p.xi1, p.xi2);
        return value(xi);
    }

  private:
    Eigen::VectorXd kappa_;
    std::vector<int> i_plus_;
    std::vector<double> in_plus_;
    double C_ = 0.0, lambda_ = 0.0;
    int n_ = 0;
};

inline PsiPoly build_psi(const CurvatureData& curv, double C, double lambda) {
    return PsiPoly(curv.kappa, curv.i_plus(), C, lambda);
}

// Second derivatives of the closed-form Christoffel symbols at the base
// point. These depend on the derivative of the curvature, so the only honest
// source on a model surface is differentiating the closed forms.
struct GammaHessianData {
    int n = 2;
    std::vector<Eigen::MatrixXd> hess_gamma11; // k -> Hess Gamma^k_11 (o)
    Eigen::VectorXd sum_hess_gamma_ii_e1e1;    // k -> sum_i Hess Gamma^k_ii(e1,e1)
};

inline GammaHessianData gamma_hessians(const ModelSurface& surface) {
    const double h = 1e-3 * std::min(surface.chart_radius, 10.0);
    GammaHessianData out;
    out.n = 2;
    out.hess_gamma11.assign(2, Eigen::MatrixXd::Zero(2, 2));
    out.sum_hess_gamma_ii_e1e1 = Eigen::VectorXd::Zero(2);
    auto gamma = [&](int k, int i, int j, double d1, double d2) {
        return christoffel_at(surface, {d1, d2}).gamma(k, i, j);
    };
    for (int k = 0; k < 2; ++k) {
        auto g11 = [&](double d1, double d2) { return gamma(k, 0, 0, d1, d2); };
        auto along1 = [&](double s) { return g11(s, 0.0); };
        auto along2 = [&](double s) { return g11(0.0, s); };
        Eigen::MatrixXd H(2, 2);
        H(0, 0) = numerics::second_derivative_o4(along1, 0.0, h);
        H(1, 1) = numerics::second_derivative_o4(along2, 0.0, h);
        // Mixed term from the 4th-order cross stencil.
        auto diag_plus = [&](double s) { return g11(s, s); };
        auto diag_minus = [&](double s) { return g11(s, -s); };
        const double dpp = numerics::second_derivative_o4(diag_plus, 0.0, h);
        const double dpm = numerics::second_derivative_o4(diag_minus, 0.0, h);
        H(0, 1) = H(1, 0) = 0.25 * (dpp - dpm);
        out.hess_gamma11[k] = H;
        double sum = 0.0;
        for (int i = 0; i < 2; ++i) {
            auto gii = [&](double s) { return gamma(k, i, i, s, 0.0); };
            sum += numerics::second_derivative_o4(gii, 0.0, h);
        }
        out.sum_hess_gamma_ii_e1e1[k] = sum;
    }
    return out;
}

struct CResult {
    double C = 0.0;
    double bound_gamma = 0.0;     // from the connection-Hessian inequality
    double bound_curvature = 0.0; // from the curvature-component inequality
    bool curvature_binding = true;
    double headroom = 1.05;
};

// Minimal positive constant meeting both defining inequalities, with
// headroom. The binding side is recorded for reports.
inline CResult compute_C(const CurvatureData& curv,
                         const std::optional<GammaHessianData>& gammas,
                         double headroom = 1.05, double floor_value = 1e-3) {
    const int n = curv.n;
    const auto i_plus = curv.i_plus();

    CResult out;
    out.headroom = headroom;

    if (!i_plus.empty()) {
        if (!gammas)
            throw InsufficientDataError(
                "connection Hessians required when some kappa_i > 0");
        if (gammas->n != n)
            throw InsufficientDataError("connection Hessian dimension mismatch");
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        for (int k : i_plus) M += 0.5 * gammas->hess_gamma11[k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
        out.bound_gamma = std::max(0.0, -eig.eigenvalues().minCoeff());
    }

    for (int i = 1; i < n; ++i) {
        const double in_plus = curv.kappa[i] > 0 ? curv.kappa[i] : 0.0;
        const double m = curv.max_abs_R_1lki(i);
        const double b =
            (n - 1) * std::pow(in_plus + std::pow(n, 1.5) * m, 2);
        out.bound_curvature = std::max(out.bound_curvature, b);
    }

    out.curvature_binding = out.bound_curvature >= out.bound_gamma;
    out.C = headroom *
            std::max({out.bound_gamma, out.bound_curvature, floor_value});
    return out;
}

struct LambdaResult {
    double lambda = 0.0;
    double root = 0.0; // larger root of the quadratic
    // c3(lambda) = A lambda^2 - B lambda - D
    double A = 0.0, B = 0.0, D = 0.0;
};

// Coefficients of the convexity functional at the base point as a quadratic
// in lambda, c3(lambda) = A lambda^2 - B lambda - D. The leading coefficient
// (4/3) sum_i kappa_i (-1 + 3 1_{I+}(i)) is nonnegative and vanishes only
// when every kappa_i = 0.
inline LambdaResult lambda_quadratic(
    const CurvatureData& curv, double C,
    const std::optional<GammaHessianData>& gammas) {
    const int n = curv.n;
    LambdaResult out;
    for (int i = 1; i < n; ++i) {
        const double ind = curv.kappa[i] > 0 ? 1.0 : 0.0;
        out.A += (4.0 / 3.0) * curv.kappa[i] * (-1.0 + 3.0 * ind);
    }
    double gamma_sum = 0.0;
    for (int k = 1; k < n; ++k) {
        if (!(curv.kappa[k] > 0)) continue;
        if (!gammas)
            throw InsufficientDataError(
                "connection Hessians required when some kappa_i > 0");
        gamma_sum += gammas->sum_hess_gamma_ii_e1e1[k];
    }
    out.B = 4.0 * C * (n + 5) + 2.0 * gamma_sum;
    out.D = 4.0 * C * (n + 5);
    return out;
}

inline LambdaResult choose_lambda(const CurvatureData& curv, double C,
                                  const std::optional<GammaHessianData>& gammas,
                                  double headroom = 1.5) {
    LambdaResult out = lambda_quadratic(curv, C, gammas);
    const double scale = std::max({std::abs(out.B), std::abs(out.D), 1.0});
    if (!(out.A > 1e-14 * scale))
        throw DegenerateCurvatureError(
            "leading coefficient vanishes: the functional is negative for "
            "every lambda (flat obstruction)");
    out.root = (out.B + std::sqrt(out.B * out.B + 4.0 * out.A * out.D)) /
               (2.0 * out.A);
    out.lambda = headroom * out.root;
    return out;
}

inline double closed_form_c3(const LambdaResult& q, double lambda) {
    return q.A * lambda * lambda - q.B * lambda - q.D;
}

// Covariant Hessian of the seed polynomial on a model surface, assembled
// from analytic derivatives and closed-form symbols.
inline Eigen::Matrix2d covariant_psi_hessian(const ModelSurface& surface,
                                             const PsiPoly& psi,
                                             const NormalPoint& p) {
    Eigen::Vector2d xi(p.xi1, p.xi2);
    Eigen::Matrix2d H = psi.hessian(xi);
    const Eigen::Vector2d grad = psi.gradient(xi);
    const Christoffel G = christoffel_at(surface, p);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                H(i, j) -= G.gamma(k, i, j) * grad[k];
    return H;
}

namespace detail {

inline double max_eigenvalue_2x2(const Eigen::Matrix2d& H) {
    const double tr = H(0, 0) + H(1, 1);
    const double disc = std::sqrt(std::pow(H(0, 0) - H(1, 1), 2) +
                                  4.0 * H(0, 1) * H(1, 0));
    return 0.5 * (tr + disc);
}

// Worst covariant-Hessian eigenvalue over a direction/radius sweep of the
// ball of radius delta.
inline double nsd_margin(const ModelSurface& surface, const PsiPoly& psi,
                         double delta, int n_dirs, int n_taus) {
    double worst = -kInf;
    for (int d = 0; d < n_dirs; ++d) {
        const double ang = 2 * std::numbers::pi * d / n_dirs;
        for (int k = 1; k <= n_taus; ++k) {
            const double tau = delta * k / n_taus;
            const NormalPoint p = NormalPoint::polar(tau, ang);
            worst = std::max(
                worst, max_eigenvalue_2x2(covariant_psi_hessian(surface, psi, p)));
        }
    }
    return worst;
}

} // namespace detail

struct DeltaOptions {
    int n_dirs = 32;
    int n_taus = 16;
    double eig_tol = 1e-8;
    double bisect_rel_tol = 1e-3; // times the working radius
};

// Maximal sampled radius of concavity, by bisection against the NSD sweep.
inline double choose_delta(const ModelSurface& surface, const PsiPoly& psi,
                           double r_max, const DeltaOptions& opts = {}) {
    if (!(r_max > 0)) throw ChartDomainError("working radius must be positive");
    auto nsd_ok = [&](double delta) {
        return detail::nsd_margin(surface, psi, delta, opts.n_dirs,
                                  opts.n_taus) <= opts.eig_tol;
    };
    double lo = 1e-4 * r_max;
    if (!nsd_ok(lo))
        throw ConstructionFailure(
            "no concavity radius found above the grid resolution");
    double hi = 0.999 * r_max;
    if (nsd_ok(hi)) return hi;
    while (hi - lo > opts.bisect_rel_tol * r_max) {
        const double mid = 0.5 * (lo + hi);
        (nsd_ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

struct CounterexampleSpec {
    CurvatureData curv;
    std::vector<int> I_plus;
    GammaHessianData gammas;
    CResult c_info;
    LambdaResult lambda_info;
    double C = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    double r = 0.0; // working chart radius
    PsiPoly psi;
};

struct ConstructionOverrides {
    std::optional<double> C;
    std::optional<double> lambda;
    std::optional<double> delta;
};

// Full construction pipeline on a model surface: curvature eigendata,
// connection Hessians, C, lambda, the seed polynomial, and delta.
inline CounterexampleSpec build_counterexample_spec(
    const ModelSurface& surface, const ConstructionOverrides& over = {},
    const DeltaOptions& delta_opts = {}) {
    CounterexampleSpec spec;
    spec.curv = curvature_data(surface);
    spec.I_plus = spec.curv.i_plus();
    spec.gammas = gamma_hessians(surface);
    spec.c_info = compute_C(spec.curv, spec.gammas);
    spec.C = over.C.value_or(spec.c_info.C);
    spec.lambda_info = choose_lambda(spec.curv, spec.C, spec.gammas);
    spec.lambda = over.lambda.value_or(spec.lambda_info.lambda);
    spec.psi = build_psi(spec.curv, spec.C, spec.lambda);
    spec.r = 0.9 * surface.convexity_radius();
    spec.delta =
        over.delta.value_or(choose_delta(surface, spec.psi, spec.r, delta_opts));
    if (!(spec.delta > 0 && spec.delta < spec.r))
        throw ConstructionFailure("delta outside (0, r)");
    return spec;
}

struct ConditionReport {
    double c1_margin = 0.0; // worst Hessian eigenvalue over the delta ball
    double c2 = 0.0;        // |Hess psi(e1,e1)(o)|
    double c3_numeric = 0.0;
    double c3_closed_form = 0.0;
    double c3_agreement = 0.0; // relative gap between the two routes
    double det_first_derivative_max = 0.0;
    double det_second_derivative_min_signed = 0.0; // (-1)^(n-1) d^2/dtau^2
    double det_second_bound = 0.0;                 // (2 lambda^2)^{n-1}(-20C/9)
    double h11_second_max = 0.0;                   // max over v of h''_11(0)
    double h1i_slope_max = 0.0;                    // max |h'_1i(0)|
    double h1i_slope_bound = 0.0;
    bool pass = false;
};

// Checks the three breaking conditions and the determinant criteria on a
// model surface, with the convexity functional computed both by nested
// finite differences of the covariant operators and by the closed-form
// quadratic; disagreement beyond 1% flags a geometry defect.
inline ConditionReport verify_conditions(const ModelSurface& surface,
                                         const CounterexampleSpec& spec,
                                         int n_dirs = 16) {
    const PsiPoly& psi = spec.psi;
    ConditionReport rep;

    rep.c1_margin =
        detail::nsd_margin(surface, psi, spec.delta, 32, 16);

    // (C2) via the finite-difference covariant Hessian, Richardson refined.
    ScalarField psi_field = [&](const NormalPoint& p) { return psi(p); };
    const Eigen::Vector2d e1(1, 0);
    const double h2 = 1e-3;
    const double cov_h =
        covariant_hessian(surface, psi_field, {0, 0}, e1, e1, h2);
    const double cov_2h =
        covariant_hessian(surface, psi_field, {0, 0}, e1, e1, 2 * h2);
    rep.c2 = std::abs((4.0 * cov_h - cov_2h) / 3.0);

    // (C3) numeric route: second difference along xi^1 of the convexity
    // functional assembled from the covariant operators.
    auto functional = [&](double x) {
        const NormalPoint p{x, 0.0};
        return laplace_beltrami(surface, psi_field, p) +
               grad_norm_sq(surface, psi_field, p);
    };
    const double hc3 = 0.02 * std::min(1.0, surface.convexity_radius());
    rep.c3_numeric =
        numerics::second_derivative_richardson(functional, 0.0, hc3).first;
    rep.c3_closed_form = closed_form_c3(spec.lambda_info, spec.lambda);
    rep.c3_agreement = std::abs(rep.c3_numeric - rep.c3_closed_form) /
                       std::max(std::abs(rep.c3_closed_form), 1e-30);
    if (rep.c3_agreement > 0.01)
        throw GeometryBugError(
            "numeric and closed-form convexity functionals disagree");

    // Determinant criteria along exp_o(tau v) over sampled unit directions.
    const double lam = spec.lambda;
    const double two_l2 = 2.0 * lam * lam;
    const double ts = 1e-5;
    rep.det_second_derivative_min_signed = kInf;
    rep.h11_second_max = -kInf;
    rep.h1i_slope_bound = (4.0 / 3.0) * lam * std::sqrt(spec.C);
    for (int d = 0; d < n_dirs; ++d) {
        const double ang = 2 * std::numbers::pi * d / n_dirs;
        auto H_at = [&](double tau) {
            return covariant_psi_hessian(surface, psi,
                                         NormalPoint::polar(tau, ang));
        };
        const Eigen::Matrix2d Hp = H_at(ts), Hm = H_at(-ts), H0 = H_at(0.0);
        const double det_p = Hp.determinant(), det_m = Hm.determinant();
        const double det_0 = H0.determinant();
        const double d1 = (det_p - det_m) / (2 * ts);
        const double d2 = (det_p - 2 * det_0 + det_m) / (ts * ts);
        rep.det_first_derivative_max =
            std::max(rep.det_first_derivative_max, std::abs(d1));
        // n = 2: (-1)^{n-1} = -1.
        rep.det_second_derivative_min_signed =
            std::min(rep.det_second_derivative_min_signed, -d2);
        const double h11_dd =
            (Hp(0, 0) - 2 * H0(0, 0) + Hm(0, 0)) / (ts * ts);
        rep.h11_second_max = std::max(rep.h11_second_max, h11_dd);
        const double h12_slope = (Hp(0, 1) - Hm(0, 1)) / (2 * ts);
        rep.h1i_slope_max = std::max(rep.h1i_slope_max, std::abs(h12_slope));
    }
    rep.det_second_bound = two_l2 * (-4.0 * spec.C + 16.0 * spec.C / 9.0);

    const bool c1_ok = rep.c1_margin <= 1e-8;
    const bool c2_ok = rep.c2 <= 1e-9;
    const bool c3_ok = rep.c3_numeric > 0.0 && rep.c3_closed_form > 0.0;
    const bool det1_ok = rep.det_first_derivative_max <= 1e-6 * two_l2;
    const bool det2_ok =
        rep.det_second_derivative_min_signed < 0.0 &&
        rep.det_second_derivative_min_signed <= 0.9 * rep.det_second_bound;
    const bool h11_ok = rep.h11_second_max <= -4.0 * spec.C * 0.95;
    const bool h1i_ok = rep.h1i_slope_max <= rep.h1i_slope_bound * (1 + 1e-6);
    rep.pass = c1_ok && c2_ok && c3_ok && det1_ok && det2_ok && h11_ok && h1i_ok;
    return rep;
}

} // namespace heatlab
