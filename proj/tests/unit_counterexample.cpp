#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "heatlab/concavity/audit.hpp"
#include "heatlab/counterexample/construction.hpp"
#include "heatlab/counterexample/experiments.hpp"

using namespace heatlab;
using Catch::Approx;

namespace {

const ModelSurface kFlat = ModelSurface::flat();
const ModelSurface kSphere = ModelSurface::sphere(1.0);
const ModelSurface kHyperbolic = ModelSurface::hyperbolic(-1.0);

} // namespace

TEST_CASE("seed polynomial", "[counterexample]") {
    SECTION("hessian at the base point is diag(0, -2 lambda^2)") {
        for (const auto* s : {&kSphere, &kHyperbolic}) {
            const auto curv = curvature_data(*s);
            const auto psi = build_psi(curv, 15.0, 3.0);
            const Eigen::MatrixXd H = psi.hessian(Eigen::Vector2d::Zero());
            REQUIRE(H(0, 0) == 0.0);
            REQUIRE(H(1, 1) == Approx(-18.0));
            REQUIRE(H(0, 1) == 0.0);
            // Covariant finite-difference route agrees at o.
            ScalarField f = [&psi](const NormalPoint& p) { return psi(p); };
            const Eigen::Vector2d e1(1, 0), e2(0, 1);
            REQUIRE(covariant_hessian(*s, f, {0, 0}, e2, e2) ==
                    Approx(-18.0).margin(1e-5));
        }
    }

    SECTION("gradient at the base point is 2 lambda on I_plus") {
        const auto curv = curvature_data(kSphere);
        const auto psi = build_psi(curv, 15.0, 3.0);
        const Eigen::VectorXd g = psi.gradient(Eigen::Vector2d::Zero());
        REQUIRE(g[0] == 0.0);
        REQUIRE(g[1] == Approx(6.0));
        const auto hcurv = curvature_data(kHyperbolic);
        const auto hpsi = build_psi(hcurv, 8.0, 3.0);
        REQUIRE(hpsi.gradient(Eigen::Vector2d::Zero())[1] == 0.0);
    }

    SECTION("flat seed reduces to the two-term polynomial") {
        const auto curv = curvature_data(kFlat);
        const double C = 1.0, lam = 3.0;
        const auto psi = build_psi(curv, C, lam);
        for (const NormalPoint p : {NormalPoint{0.3, -0.2}, NormalPoint{0.1, 0.4}}) {
            const double rho2 = p.xi1 * p.xi1 + p.xi2 * p.xi2;
            const double want = -lam * lam * p.xi2 * p.xi2 -
                                C * (1 + lam) * p.xi1 * p.xi1 * rho2;
            REQUIRE(psi(p) == Approx(want).margin(1e-14));
        }
    }

    SECTION("sphere value matches the hand-expanded polynomial") {
        const auto curv = curvature_data(kSphere);
        const double C = 15.0, lam = 3.0;
        const auto psi = build_psi(curv, C, lam);
        const double x = 0.1, y = 0.1;
        // Independent expansion with kappa_2 = 1, I_plus = {2}.
        const double want = 2 * lam * y - lam * lam * y * y +
                            (2.0 / 3.0) * lam * x * x * y -
                            x * x * (C * (1 + lam) * (x * x + y * y) +
                                     lam * lam * y * y);
        REQUIRE(psi({x, y}) == Approx(want).epsilon(1e-14));
    }

    SECTION("analytic derivatives agree with finite differences") {
        const auto curv = curvature_data(kSphere);
        const auto psi = build_psi(curv, 15.39, 20.0);
        const Eigen::Vector2d p(0.07, -0.04);
        auto val = [&](double a, double b) {
            return psi.value(Eigen::Vector2d(p[0] + a, p[1] + b));
        };
        const double h = 1e-5;
        const Eigen::VectorXd g = psi.gradient(p);
        REQUIRE(g[0] == Approx((val(h, 0) - val(-h, 0)) / (2 * h)).margin(1e-7));
        REQUIRE(g[1] == Approx((val(0, h) - val(0, -h)) / (2 * h)).margin(1e-7));
        const Eigen::MatrixXd H = psi.hessian(p);
        REQUIRE(H(0, 0) ==
                Approx((val(h, 0) - 2 * val(0, 0) + val(-h, 0)) / (h * h))
                    .margin(1e-4));
        REQUIRE(H(0, 1) == Approx((val(h, h) - val(h, -h) - val(-h, h) +
                                   val(-h, -h)) /
                                  (4 * h * h))
                               .margin(1e-4));
    }

    SECTION("derivative table at the base point") {
        const auto curv = curvature_data(kSphere);
        const double C = 15.0, lam = 3.0;
        const auto psi = build_psi(curv, C, lam);
        const double h = 1e-3;
        // d^3 psi / dx^2 dxi_2 at o = (4/3) lambda kappa_2.
        auto h00_along2 = [&](double s) {
            return psi.hessian(Eigen::Vector2d(0.0, s))(0, 0);
        };
        REQUIRE(numerics::first_derivative_o4(h00_along2, 0.0, h) ==
                Approx((4.0 / 3.0) * lam).margin(1e-9));
        // d^4 psi / dx^2 dxi_2^2 at o = -4 [C(1+lambda) + lambda^2 kappa_2].
        REQUIRE(numerics::second_derivative_o4(h00_along2, 0.0, h) ==
                Approx(-4 * (C * (1 + lam) + lam * lam)).margin(1e-6));
        // d^4 psi / dx^4 at o = -24 C (1 + lambda).
        auto h00_along1 = [&](double s) {
            return psi.hessian(Eigen::Vector2d(s, 0.0))(0, 0);
        };
        REQUIRE(numerics::second_derivative_o4(h00_along1, 0.0, h) ==
                Approx(-24 * C * (1 + lam)).margin(1e-6));
    }
}

TEST_CASE("constant selection", "[counterexample]") {
    SECTION("sphere: curvature inequality binds at (1 + 2 sqrt 2)^2") {
        const auto curv = curvature_data(kSphere);
        const auto c = compute_C(curv, gamma_hessians(kSphere));
        const double bound = std::pow(1.0 + 2.0 * std::numbers::sqrt2, 2);
        REQUIRE(c.bound_curvature == Approx(bound).epsilon(1e-12));
        REQUIRE(c.curvature_binding);
        REQUIRE(c.C == Approx(1.05 * bound).epsilon(1e-9));
        // Connection Hessians vanish on a model surface by parity.
        REQUIRE(c.bound_gamma < 1e-6);
    }

    SECTION("hyperbolic: empty I_plus leaves (2 sqrt 2)^2") {
        const auto curv = curvature_data(kHyperbolic);
        const auto c = compute_C(curv, gamma_hessians(kHyperbolic));
        REQUIRE(c.bound_curvature == Approx(8.0).epsilon(1e-12));
        REQUIRE(c.C == Approx(8.4).epsilon(1e-9));
    }

    SECTION("flat: small positive floor") {
        const auto curv = curvature_data(kFlat);
        const auto c = compute_C(curv, gamma_hessians(kFlat));
        REQUIRE(c.C > 0.0);
        REQUIRE(c.C < 0.01);
    }

    SECTION("kappa > 0 without connection data is an error") {
        const auto curv = curvature_data(kSphere);
        REQUIRE_THROWS_AS(compute_C(curv, std::nullopt),
                          InsufficientDataError);
    }
}

TEST_CASE("lambda selection", "[counterexample]") {
    SECTION("flat curvature degenerates") {
        const auto curv = curvature_data(kFlat);
        REQUIRE_THROWS_AS(
            choose_lambda(curv, 1.0, gamma_hessians(kFlat)),
            DegenerateCurvatureError);
    }

    SECTION("sphere leading coefficient is 8/3") {
        const auto curv = curvature_data(kSphere);
        const auto q = choose_lambda(curv, 15.0, gamma_hessians(kSphere));
        REQUIRE(q.A == Approx(8.0 / 3.0).margin(1e-9));
        REQUIRE(q.lambda == Approx(1.5 * q.root));
        REQUIRE(closed_form_c3(q, q.lambda) > 0.0);
    }

    SECTION("hyperbolic leading coefficient is 4/3 through the empty branch") {
        const auto curv = curvature_data(kHyperbolic);
        const auto q = choose_lambda(curv, 8.4, gamma_hessians(kHyperbolic));
        REQUIRE(q.A == Approx(4.0 / 3.0).margin(1e-9));
        REQUIRE(closed_form_c3(q, q.lambda) > 0.0);
        REQUIRE(curv.i_plus().empty());
    }

    SECTION("flat scan: the functional is negative for every lambda") {
        const auto curv = curvature_data(kFlat);
        const auto q = lambda_quadratic(curv, 1.0, gamma_hessians(kFlat));
        REQUIRE(q.A == Approx(0.0).margin(1e-12));
        for (int k = 0; k <= 1000; k += 50)
            REQUIRE(closed_form_c3(q, std::max(1, k)) < 0.0);
    }
}

TEST_CASE("concavity radius", "[counterexample]") {
    SECTION("flat degenerate quartic is concave on a sampled ball") {
        const auto curv = curvature_data(kFlat);
        const auto psi = build_psi(curv, 1.0, 3.0);
        const double delta = choose_delta(kFlat, psi, 1.0);
        REQUIRE(delta > 0.1);
        REQUIRE(detail::nsd_margin(kFlat, psi, delta, 32, 16) <= 1e-8);
    }

    SECTION("sphere spec yields a positive radius; doubling lambda reported") {
        const auto spec = build_counterexample_spec(kSphere);
        REQUIRE(spec.delta > 0.0);
        REQUIRE(spec.delta < spec.r);
        const auto psi2 =
            build_psi(spec.curv, spec.C, 2.0 * spec.lambda);
        const double delta2 = choose_delta(kSphere, psi2, spec.r);
        REQUIRE(delta2 > 0.0);
        INFO("delta at lambda = " << spec.lambda << ": " << spec.delta
                                  << ", at doubled lambda: " << delta2);
    }
}

TEST_CASE("condition verification", "[counterexample]") {
    SECTION("sphere spec passes all conditions") {
        const auto spec = build_counterexample_spec(kSphere);
        const auto rep = verify_conditions(kSphere, spec);
        REQUIRE(rep.pass);
        REQUIRE(rep.c2 <= 1e-9);
        REQUIRE(rep.c3_numeric > 0.0);
        REQUIRE(rep.c3_agreement <= 0.01);
        REQUIRE(rep.det_first_derivative_max <=
                1e-6 * 2 * spec.lambda * spec.lambda);
        REQUIRE(rep.det_second_derivative_min_signed < 0.0);
        REQUIRE(rep.h11_second_max <= -4 * spec.C * 0.95);
        REQUIRE(rep.h1i_slope_max <= rep.h1i_slope_bound);
    }

    SECTION("hyperbolic spec passes through the empty I_plus branch") {
        const auto spec = build_counterexample_spec(kHyperbolic);
        REQUIRE(spec.I_plus.empty());
        const auto rep = verify_conditions(kHyperbolic, spec);
        REQUIRE(rep.pass);
        REQUIRE(rep.c3_numeric > 0.0);
    }

    SECTION("the seed exponential is log-concave on the delta ball") {
        const auto spec = build_counterexample_spec(kSphere);
        auto f = [&](const NormalPoint& p) { return std::exp(spec.psi(p)); };
        AuditOptions opts;
        opts.n_pairs = 24;
        const auto rep = audit_domain(f, AdmissibleFunction::power(0.0),
                                      kSphere, 0.98 * spec.delta, opts);
        REQUIRE(rep.pass);
    }
}

TEST_CASE("breaking experiments", "[counterexample][breaking]") {
    // Reduced resolution with the time step pinned to the reference scale,
    // so the early window keeps enough samples.
    auto fast_options = [](const ModelSurface& surface,
                           const CounterexampleSpec& spec) {
        BreakingOptions o;
        o.n_rho = 96;
        o.n_theta = 64;
        o.dense_steps = 32;
        o.probe_stride = 16;
        o.scan_window = 0.5;
        const double cut =
            std::min(spec.delta, o.datum_cut_widths / spec.lambda);
        const double R = std::min(2 * cut, 0.95 * surface.chart_radius);
        o.dt = 0.25 * (R / 256.0) * (R / 256.0);
        return o;
    };

    SECTION("flat gaussian control stays unbroken") {
        BreakingOptions fast;
        fast.n_rho = 96;
        fast.n_theta = 64;
        fast.dense_steps = 16;
        fast.probe_stride = 16;
        auto phi = [](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho());
        };
        EuclideanDatum2D datum{
            [](double x1, double x2) {
                return std::exp(-(x1 * x1 + x2 * x2));
            },
            4.0};
        datum.gaussian_s = 0.25; // exp(-r^2) = exp(-r^2/(4s)) at s = 1/4
        const auto res = probe_breaking_series(kFlat, 4.0, phi, datum,
                                               std::nullopt, 0.05, fast);
        REQUIRE(res.verdict == BreakingVerdict::NotBroken);
        for (const auto& s : res.series) REQUIRE(s.value < 0.0);
    }

    SECTION("sphere run breaks early") {
        const auto spec = build_counterexample_spec(kSphere);
        const auto res =
            breaking_experiment(kSphere, spec, fast_options(kSphere, spec));
        REQUIRE(res.verdict == BreakingVerdict::Broken);
        REQUIRE(res.t_broken <= 0.1 * spec.delta * spec.delta);
        REQUIRE(res.initial_slope > 0.0);
        REQUIRE(res.slope_ok);
    }

    SECTION("hyperbolic run breaks early") {
        const auto spec = build_counterexample_spec(kHyperbolic);
        const auto res = breaking_experiment(kHyperbolic, spec,
                                             fast_options(kHyperbolic, spec));
        REQUIRE(res.verdict == BreakingVerdict::Broken);
        REQUIRE(res.t_broken <= 0.1 * spec.delta * spec.delta);
        REQUIRE(res.slope_ok);
    }
}

TEST_CASE("far-field chord violation demo", "[counterexample]") {
    SECTION("identity-like F yields a certificate") {
        const auto cert =
            infinity_counterexample_demo(AdmissibleFunction::power(1.0));
        REQUIRE(cert.found);
        REQUIRE(cert.slack < -1e-3);
        REQUIRE(std::max(std::abs(cert.y), std::abs(cert.z)) > 1.5);
    }

    SECTION("log control finds no violation") {
        const auto cert =
            infinity_counterexample_demo(AdmissibleFunction::power(0.0));
        REQUIRE_FALSE(cert.found);
        REQUIRE(cert.slack >= -1e-9);
    }

    SECTION("the evolved indicator vanishes toward infinity") {
        EuclideanDatum1D psi{
            [](double y) { return (y >= -1 && y <= 1) ? 1.0 : 0.0; }, -1.0,
            1.0, true};
        REQUIRE(euclidean_semigroup(psi, 1.0, 0.0) >
                euclidean_semigroup(psi, 1.0, 10.0));
    }

    SECTION("height above the admissible range is rejected") {
        InfinityDemoOptions opts;
        opts.a_prime = 2.0;
        const auto F = AdmissibleFunction::hot(1.0);
        REQUIRE_THROWS_AS(infinity_counterexample_demo(F, opts),
                          AdmissibilityError);
    }
}

TEST_CASE("rescaling convergence", "[counterexample][rescaling]") {
    const EuclideanDatum2D psi_m{
        [](double x1, double x2) {
            const double q = (x1 / 0.9) * (x1 / 0.9) + (x2 / 0.7) * (x2 / 0.7);
            return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
        },
        0.95};

    SECTION("flat ladder sits at the solver floor") {
        RescalingOptions opts;
        opts.n_rho_per_unit = 32;
        opts.n_steps = 192;
        const auto rungs = rescaling_experiment(kFlat, psi_m, {2.0}, opts);
        REQUIRE(rungs.size() == 1);
        REQUIRE(rungs[0].sup_diff < 5e-3);
    }

    SECTION("ladder exiting the chart guard is refused") {
        const auto tight = ModelSurface::sphere(4.0); // chart ~ pi/2
        REQUIRE_THROWS_AS(rescaling_experiment(tight, psi_m, {2.0}),
                          ChartDomainError);
    }
}
