#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "heatlab/concavity/admissible.hpp"
#include "heatlab/concavity/audit.hpp"
#include "heatlab/concavity/hot_approximation.hpp"
#include "heatlab/numerics.hpp"

using namespace heatlab;
using Catch::Approx;

namespace {

const ModelSurface kFlat = ModelSurface::flat();

// Cross-check oracle for the hot inverse through the error function; the
// library route is quadrature plus root finding, so this is independent.
double hot_inverse_oracle(double tau) {
    auto cdf = [](double s) { return 0.5 * (1.0 + std::erf(0.5 * s)); };
    auto pdf = [](double s) {
        return 0.5 / std::sqrt(std::numbers::pi) * std::exp(-0.25 * s * s);
    };
    return numerics::invert_monotone(cdf, pdf, tau, -100.0, 100.0, 1e-14);
}

AuditOptions fast_opts() {
    AuditOptions o;
    o.n_pairs = 16;
    return o;
}

} // namespace

TEST_CASE("power and hot function evaluation", "[concavity]") {
    SECTION("power formula spot values") {
        REQUIRE(AdmissibleFunction::power(2.0)(3.0) == Approx(4.0));
        REQUIRE(AdmissibleFunction::power(-1.0)(2.0) == Approx(0.5));
        REQUIRE(AdmissibleFunction::power(0.0)(1.0) == Approx(0.0));
    }

    SECTION("value at zero is the bottom element") {
        for (double alpha : {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0})
            REQUIRE(AdmissibleFunction::power(alpha)(0.0) == -kInf);
        REQUIRE(AdmissibleFunction::hot(1.0)(0.0) == -kInf);
    }

    SECTION("domain errors") {
        const auto H1 = AdmissibleFunction::hot(1.0);
        REQUIRE_THROWS_AS(H1(1.0), AdmissibilityError);
        REQUIRE_THROWS_AS(H1(-0.1), AdmissibilityError);
        REQUIRE_THROWS_AS(AdmissibleFunction::power(-1.0).inverse(2.0),
                          std::out_of_range);
    }

    SECTION("hot function at one half vanishes by kernel symmetry") {
        REQUIRE(AdmissibleFunction::hot(1.0)(0.5) == Approx(0.0).margin(1e-10));
    }

    SECTION("hot function matches the spot value and the erf oracle") {
        const double v = AdmissibleFunction::hot(1.0)(0.841345);
        REQUIRE(v == Approx(1.414214).margin(1e-5));
        for (double tau : {1e-6, 0.02, 0.31, 0.5, 0.77, 0.9991})
            REQUIRE(AdmissibleFunction::hot(1.0)(tau) ==
                    Approx(hot_inverse_oracle(tau)).margin(1e-11));
    }

    SECTION("hot function is strictly increasing and unbounded below") {
        const auto H1 = AdmissibleFunction::hot(1.0);
        double prev = -kInf;
        for (double r : {1e-12, 1e-6, 0.1, 0.5, 0.9, 0.999999}) {
            const double v = H1(r);
            REQUIRE(v > prev);
            prev = v;
        }
        REQUIRE(H1(1e-12) < -9.0);
    }

    SECTION("hot with infinite parameter degenerates to log") {
        const auto Hinf = AdmissibleFunction::hot(kInf);
        REQUIRE(Hinf(2.0) == Approx(std::log(2.0)));
    }

    SECTION("round trip inverse of eval within 1e-10 relative") {
        for (double alpha : {-2.0, -1.0, 0.0, 0.5, 2.0}) {
            const auto F = AdmissibleFunction::power(alpha);
            // Positive exponents compress (0, eps) into a sliver above the
            // bottom, so the checked band stays away from zero there.
            const double r_min = alpha > 0 ? 0.03 : 1e-6;
            for (double r : {r_min, 0.2, 0.5, 1.0, 7.5}) {
                const double back = F.inverse(F(r));
                REQUIRE(back == Approx(r).epsilon(1e-10));
            }
        }
        const auto H = AdmissibleFunction::hot(2.0);
        for (double r : {1e-6, 0.2, 1.0, 1.9, 1.999998}) {
            REQUIRE(H.inverse(H(r)) == Approx(r).epsilon(1e-10));
        }
    }

    SECTION("custom monotone tables interpolate and invert") {
        const auto F = AdmissibleFunction::custom(
            {{0.5, 0.5}, {1.0, 1.0}, {2.0, 2.0}, {4.0, 4.0}}, kInf);
        REQUIRE(F(1.5) == Approx(1.5));
        REQUIRE(F(8.0) == Approx(8.0)); // linear extension
        REQUIRE(F.inverse(3.0) == Approx(3.0));
        REQUIRE(F(0.0) == -kInf);
        REQUIRE(F.finite_limit_at_zero());
        REQUIRE_THROWS_AS(
            AdmissibleFunction::custom({{0.5, 1.0}, {1.0, 0.5}}, kInf),
            AdmissibilityError);
    }
}

TEST_CASE("chord audits along geodesics", "[concavity]") {
    const auto log_F = AdmissibleFunction::power(0.0);
    const std::vector<double> taus = {0.125, 0.25, 0.375, 0.5,
                                      0.625, 0.75, 0.875};

    SECTION("gaussian bump is log-concave along a flat segment") {
        auto f = [](const NormalPoint& p) {
            return std::exp(-p.xi1 * p.xi1 - p.xi2 * p.xi2);
        };
        const auto c = geodesic(kFlat, {-1.5, 0.2}, {2.0, -0.4});
        const auto rep = audit_along(f, log_F, c, taus);
        REQUIRE(rep.pass);
        REQUIRE(rep.min_slack >= 0.0);
    }

    SECTION("convex exponent fails at the midpoint") {
        auto f = [](const NormalPoint& p) { return std::exp(p.xi1 * p.xi1); };
        const auto c = geodesic(kFlat, {-1.0, 0.0}, {1.0, 0.0});
        const auto rep = audit_along(f, log_F, c, taus);
        REQUIRE_FALSE(rep.pass);
        REQUIRE(rep.min_slack < 0.0);
        REQUIRE(rep.witness.tau == Approx(0.5));
    }

    SECTION("scaled indicator: bottom endpoints satisfy the chord bound") {
        auto f = [](const NormalPoint& p) {
            return p.rho() < 1.0 ? 0.7 : 0.0;
        };
        const auto c = geodesic(kFlat, {-3.0, 0.0}, {3.0, 0.0});
        const auto rep = audit_along(f, log_F, c, taus);
        REQUIRE(rep.pass);
        REQUIRE(rep.min_slack == kInf);
    }

    SECTION("witness reproduces the reported slack") {
        auto f = [](const NormalPoint& p) {
            return std::exp(p.xi1 * p.xi1 * p.xi1);
        };
        const auto rep = audit_domain(f, log_F, kFlat, 1.2, fast_opts());
        REQUIRE_FALSE(rep.pass);
        const double again = reevaluate_witness(f, log_F, kFlat, rep.witness);
        REQUIRE(again == Approx(rep.min_slack).epsilon(1e-12));
    }
}

TEST_CASE("domain audits", "[concavity]") {
    const auto log_F = AdmissibleFunction::power(0.0);

    SECTION("constant one half passes with zero slack") {
        auto f = [](const NormalPoint&) { return 0.5; };
        const auto rep = audit_domain(f, log_F, kFlat, 1.0, fast_opts());
        REQUIRE(rep.pass);
        REQUIRE(rep.min_slack == Approx(0.0).margin(1e-14));
    }

    SECTION("cubic exponent fails on a flat ball") {
        auto f = [](const NormalPoint& p) {
            return std::exp(p.xi1 * p.xi1 * p.xi1);
        };
        const auto rep = audit_domain(f, log_F, kFlat, 1.2, fast_opts());
        REQUIRE_FALSE(rep.pass);
    }

    SECTION("ball outside the convexity guard is refused") {
        auto f = [](const NormalPoint&) { return 0.5; };
        const auto sph = ModelSurface::sphere(1.0);
        REQUIRE_THROWS_AS(audit_domain(f, log_F, sph, 2.5, fast_opts()),
                          ChartDomainError);
    }

    SECTION("quasi and infinity extremes") {
        auto bump = [](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho());
        };
        REQUIRE(audit_extremes(bump, ExtremeMode::Quasi, kFlat, 1.5,
                               fast_opts())
                    .pass);

        auto two_bumps = [](const NormalPoint& p) {
            const double d1 = std::hypot(p.xi1 - 1.0, p.xi2);
            const double d2 = std::hypot(p.xi1 + 1.0, p.xi2);
            return std::exp(-8 * d1 * d1) + std::exp(-8 * d2 * d2);
        };
        const auto rep = audit_extremes(two_bumps, ExtremeMode::Quasi, kFlat,
                                        1.5, fast_opts());
        REQUIRE_FALSE(rep.pass);

        auto indicator = [](const NormalPoint& p) {
            return p.rho() < 0.8 ? 1.0 : 0.0;
        };
        REQUIRE(audit_extremes(indicator, ExtremeMode::Infinity, kFlat, 1.5,
                               fast_opts())
                    .pass);
    }

    SECTION("audit passes imply weaker audits on the same samples") {
        auto f = [](const NormalPoint& p) {
            return std::exp(-2 * p.xi1 * p.xi1 - p.xi2 * p.xi2 + 0.4 * p.xi1);
        };
        const auto opts = fast_opts();
        // Log-concave, so every alpha <= 0 must pass along with quasi.
        for (double alpha : {0.0, -1.0, -2.0}) {
            REQUIRE(audit_domain(f, AdmissibleFunction::power(alpha), kFlat,
                                 1.0, opts)
                        .pass);
        }
        REQUIRE(audit_extremes(f, ExtremeMode::Quasi, kFlat, 1.0, opts).pass);
    }

    SECTION("scaling a log audit leaves slacks unchanged") {
        auto f = [](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho() + 0.3 * p.xi2);
        };
        auto f_scaled = [f](const NormalPoint& p) { return 0.23 * f(p); };
        const auto opts = fast_opts();
        const auto log_F0 = AdmissibleFunction::power(0.0);
        const auto r1 = audit_domain(f, log_F0, kFlat, 1.0, opts);
        const auto r2 = audit_domain(f_scaled, log_F0, kFlat, 1.0, opts);
        REQUIRE(r1.min_slack == Approx(r2.min_slack).margin(1e-12));
    }
}

TEST_CASE("hot approximation and rescaling", "[concavity][hot]") {
    const auto opts = fast_opts();

    SECTION("constant input: surrogate error shrinks along the ladder") {
        auto f = [](const NormalPoint&) { return 0.8; };
        double prev = kInf;
        for (double a : {5.0, 50.0, 500.0}) {
            const auto approx = hot_approximation(f, kFlat, 1.0, a, opts);
            REQUIRE(approx.audit.pass);
            REQUIRE(approx.sup_error < prev + 1e-15);
            prev = approx.sup_error;
        }
        REQUIRE(prev < 1e-8);
    }

    SECTION("gaussian bump: composition identity is exact by construction") {
        auto f = [](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho());
        };
        const double a = 10.0;
        const auto approx = hot_approximation(f, kFlat, 1.0, a, opts);
        REQUIRE(approx.audit.pass);
        const auto Ha = AdmissibleFunction::hot(a);
        for (const NormalPoint p :
             {NormalPoint{0.0, 0.0}, NormalPoint{0.4, -0.3},
              NormalPoint{-0.8, 0.1}}) {
            const double lhs = Ha(approx.g(p));
            const double rhs = approx.alpha * std::log(f(p)) + approx.beta;
            REQUIRE(lhs == Approx(rhs).margin(1e-10));
        }
    }

    SECTION("non-log-concave input is rejected up front") {
        auto f = [](const NormalPoint& p) { return std::exp(p.xi1 * p.xi1); };
        REQUIRE_THROWS_AS(hot_approximation(f, kFlat, 1.2, 10.0, opts),
                          PreconditionError);
    }

    SECTION("rescale identity: constant function, equal slacks") {
        auto f = [](const NormalPoint&) { return 0.6; };
        const auto rep = hot_rescale_check(f, 100.0, 10.0, kFlat, 1.0, opts);
        REQUIRE(rep.pass);
        REQUIRE(rep.slack_gap <= 1e-9);
    }

    SECTION("rescale check from a fitted surrogate") {
        auto f = [](const NormalPoint& p) {
            return std::exp(-0.7 * p.rho() * p.rho());
        };
        const double b = 100.0;
        const auto approx = hot_approximation(f, kFlat, 1.0, b, opts);
        const auto rep = hot_rescale_check(approx.g, b, 10.0, kFlat, 1.0, opts);
        REQUIRE(rep.pass);
    }

    SECTION("adversarial input fails the rescale precondition") {
        auto f = [](const NormalPoint& p) {
            return 1.0 + std::cos(4.0 * p.xi1);
        };
        REQUIRE_THROWS_AS(hot_rescale_check(f, 100.0, 10.0, kFlat, 1.0, opts),
                          PreconditionError);
    }
}
