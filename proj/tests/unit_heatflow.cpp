#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "heatlab/heatflow/operator.hpp"
#include "heatlab/heatflow/polar_grid.hpp"
#include "heatlab/heatflow/probe.hpp"
#include "heatlab/heatflow/semigroup.hpp"
#include "heatlab/heatflow/solver.hpp"
#include "heatlab/numerics.hpp"

using namespace heatlab;
using Catch::Approx;

namespace {

const ModelSurface kFlat = ModelSurface::flat();

// First zero of J_0, bisected from the standard-library Bessel function.
double bessel_j0_first_root() {
    return numerics::invert_monotone(
        [](double x) { return -std::cyl_bessel_j(0.0, x); },
        [](double x) { return std::cyl_bessel_j(1.0, x); }, 0.0, 2.0, 3.0,
        1e-14);
}

} // namespace

TEST_CASE("euclidean semigroup", "[heatflow]") {
    SECTION("gaussian datum: quadrature matches the closed form") {
        const double s = 0.35;
        EuclideanDatum1D phi{
            [s](double y) { return std::exp(-y * y / (4 * s)); }, -kInf, kInf,
            true};
        for (double t : {0.05, 0.4})
            for (double x : {0.0, 0.7, -1.3}) {
                const double quad = euclidean_semigroup(phi, t, x);
                const double exact = gaussian_semigroup(1, s, t, x * x);
                REQUIRE(quad == Approx(exact).epsilon(1e-9));
            }
        EuclideanDatum2D phi2{[s](double y1, double y2) {
                                  return std::exp(-(y1 * y1 + y2 * y2) /
                                                  (4 * s));
                              },
                              14.0};
        const double quad2 = euclidean_semigroup(phi2, 0.2, 0.3, -0.4);
        const double exact2 = gaussian_semigroup(2, s, 0.2, 0.25);
        REQUIRE(quad2 == Approx(exact2).epsilon(1e-7));
    }

    SECTION("half-line indicator at the origin gives one half") {
        EuclideanDatum1D phi{[](double y) { return y >= 0 ? 1.0 : 0.0; }, 0.0,
                             kInf, true};
        REQUIRE(euclidean_semigroup(phi, 1.0, 0.0) ==
                Approx(0.5).margin(1e-10));
    }

    SECTION("constants are fixed points") {
        EuclideanDatum1D phi{[](double) { return 0.37; }, -kInf, kInf, true};
        for (double t : {0.1, 1.0, 5.0})
            REQUIRE(euclidean_semigroup(phi, t, 0.8) ==
                    Approx(0.37).epsilon(1e-11));
    }

    SECTION("unbounded data are rejected") {
        EuclideanDatum1D phi{[](double y) { return y; }, -kInf, kInf, false};
        REQUIRE_THROWS_AS(euclidean_semigroup(phi, 1.0, 0.0),
                          ChartDomainError);
    }
}

TEST_CASE("discrete laplace-beltrami operator", "[heatflow]") {
    SECTION("flat: recovers laplacian 4 of |xi|^2 in the interior") {
        const PolarGrid grid(2.0, 64, 64);
        const auto op = assemble_operator(kFlat, grid);
        auto f = ScalarGridField::sample(
            grid, [](const NormalPoint& p) { return p.rho() * p.rho(); });
        const Eigen::VectorXd Lu = op.L * op.restrict_field(f);
        REQUIRE(Lu[0] == Approx(4.0).margin(1e-6));
        for (int i = 1; i <= grid.n_rho - 3; i += 7)
            for (int j = 0; j < grid.n_theta; j += 9)
                REQUIRE(Lu[grid.node_index(i, j)] == Approx(4.0).margin(1e-6));
    }

    SECTION("sphere: laplacian of xi^1 vanishes at the pole") {
        const PolarGrid grid(0.8, 64, 64);
        const auto op = assemble_operator(ModelSurface::sphere(1.0), grid);
        auto f = ScalarGridField::sample(
            grid, [](const NormalPoint& p) { return p.xi1; });
        const Eigen::VectorXd Lu = op.L * op.restrict_field(f);
        REQUIRE(Lu[0] == Approx(0.0).margin(1e-9));
    }

    SECTION("symmetric under the sqrt(det g) weights") {
        for (const auto& s :
             {kFlat, ModelSurface::sphere(1.0), ModelSurface::hyperbolic(-1.0)}) {
            const PolarGrid grid(0.9, 32, 64);
            const auto op = assemble_operator(s, grid);
            Eigen::SparseMatrix<double> W = op.measure.asDiagonal() * op.L;
            Eigen::SparseMatrix<double> D =
                W - Eigen::SparseMatrix<double>(W.transpose());
            double scale = 0.0, defect = 0.0;
            for (int k = 0; k < W.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(W, k); it;
                     ++it)
                    scale = std::max(scale, std::abs(it.value()));
            for (int k = 0; k < D.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it;
                     ++it)
                    defect = std::max(defect, std::abs(it.value()));
            REQUIRE(defect <= 1e-10 * scale);
        }
    }

    SECTION("row sums vanish away from the boundary ring") {
        const PolarGrid grid(1.0, 32, 64);
        const auto op = assemble_operator(ModelSurface::sphere(1.0), grid);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.unknowns());
        const Eigen::VectorXd sums = op.L * ones;
        REQUIRE(std::abs(sums[0]) < 1e-10);
        for (int i = 1; i <= grid.n_rho - 2; i += 5)
            for (int j = 0; j < grid.n_theta; j += 11)
                REQUIRE(std::abs(sums[grid.node_index(i, j)]) < 1e-8);
    }

    SECTION("smallest dirichlet eigenvalue matches the bessel oracle") {
        const double j01 = bessel_j0_first_root();
        REQUIRE(j01 == Approx(2.404825557695773).margin(1e-12));
        const double target = j01 * j01;

        const PolarGrid grid(1.0, 256, 64);
        const auto op = assemble_operator(kFlat, grid);
        const double lam = smallest_dirichlet_eigenvalue(op);
        REQUIRE(lam == Approx(target).epsilon(5e-3));

        // Spatial convergence order from three resolutions.
        double err[3];
        int idx = 0;
        for (int n : {64, 128, 256}) {
            const auto o = assemble_operator(kFlat, PolarGrid(1.0, n, 64));
            err[idx++] = std::abs(smallest_dirichlet_eigenvalue(o) - target);
        }
        REQUIRE(std::log2(err[0] / err[1]) >= 1.8);
        REQUIRE(std::log2(err[1] / err[2]) >= 1.8);
    }

    SECTION("grid outside the chart guard is refused") {
        const auto sph = ModelSurface::sphere(1.0);
        REQUIRE_THROWS_AS(assemble_operator(sph, PolarGrid(3.2, 64, 64)),
                          ChartDomainError);
    }
}

TEST_CASE("implicit stepping", "[heatflow]") {
    SECTION("zero state stays zero") {
        const PolarGrid grid(1.0, 32, 64);
        const HeatStepper stepper(kFlat, grid, 1e-3);
        ScalarGridField z(grid);
        const auto next = stepper.advance(z);
        REQUIRE(next.values.lpNorm<Eigen::Infinity>() == 0.0);
        REQUIRE(next.time == Approx(1e-3));
    }

    SECTION("constant interior far from the boundary is preserved") {
        const PolarGrid grid(8.0, 64, 64);
        const HeatStepper stepper(kFlat, grid, 1e-3);
        auto state = ScalarGridField::sample(
            grid, [](const NormalPoint&) { return 2.5; });
        state.zero_boundary();
        auto next = stepper.advance(state);
        for (int k = 0; k < 5; ++k) next = stepper.advance(next);
        // Boundary influence at distance ~8 is exponentially negligible.
        REQUIRE(next.values[0] == Approx(2.5).epsilon(1e-12));
    }

    SECTION("gaussian on a large flat disk tracks the euclidean semigroup") {
        const double s = 0.5;
        auto phi = [s](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho() / (4 * s));
        };
        SolveOptions opts;
        opts.n_rho = 128;
        opts.n_theta = 64;
        const auto sol = solve(kFlat, 8.0, phi, {0.05}, opts);
        const auto& field = sol.snapshots.front();
        const double t = field.time;
        for (double rho : {0.0, 0.4, 1.1})
            for (double th : {0.0, 1.1}) {
                const double have = interpolate(field, rho, th);
                const double want = gaussian_semigroup(2, s, t, rho * rho);
                REQUIRE(have == Approx(want).epsilon(1e-3));
            }
    }

    SECTION("boundary-dirty states are rejected") {
        const PolarGrid grid(1.0, 32, 64);
        const HeatStepper stepper(kFlat, grid, 1e-4);
        auto state = ScalarGridField::sample(
            grid, [](const NormalPoint&) { return 1.0; });
        REQUIRE_THROWS_AS(stepper.advance(state), ChartDomainError);
    }
}

TEST_CASE("dirichlet heat solve", "[heatflow]") {
    SECTION("zero datum gives the zero flow") {
        SolveOptions opts;
        opts.n_rho = 32;
        const auto sol =
            solve(kFlat, 1.0, [](const NormalPoint&) { return 0.0; },
                  {0.01, 0.02}, opts);
        for (const auto& snap : sol.snapshots)
            REQUIRE(snap.values.lpNorm<Eigen::Infinity>() == 0.0);
    }

    SECTION("eigenfunction decay rate on the flat unit disk") {
        const double j01 = bessel_j0_first_root();
        auto phi = [&](const NormalPoint& p) {
            return std::cyl_bessel_j(0.0, j01 * p.rho());
        };
        SolveOptions opts;
        opts.n_rho = 128;
        opts.n_theta = 64;
        opts.dt = 2e-4;
        const auto sol = solve(kFlat, 1.0, phi, {0.2}, opts);
        std::vector<double> ts, logs;
        for (const auto& d : sol.steps) {
            if (d.t < 0.05) continue;
            ts.push_back(d.t);
            logs.push_back(std::log(d.sup));
        }
        const auto fit = numerics::fit_line(ts, logs);
        REQUIRE(-fit.slope == Approx(j01 * j01).epsilon(0.02));
    }

    SECTION("temporal refinement shows second order") {
        const double j01 = bessel_j0_first_root();
        auto phi = [&](const NormalPoint& p) {
            return std::cyl_bessel_j(0.0, j01 * p.rho());
        };
        SolveOptions opts;
        opts.n_rho = 48;
        opts.n_theta = 64;
        auto center_at = [&](double dt) {
            SolveOptions o = opts;
            o.dt = dt;
            const auto sol = solve(kFlat, 1.0, phi, {0.2}, o);
            return sol.snapshots.front().values[0];
        };
        const double ref = center_at(2.5e-4);
        const double e1 = std::abs(center_at(8e-3) - ref);
        const double e2 = std::abs(center_at(4e-3) - ref);
        const double e3 = std::abs(center_at(2e-3) - ref);
        REQUIRE(std::log2(e1 / e2) >= 1.8);
        REQUIRE(std::log2(e2 / e3) >= 1.8);
    }

    SECTION("maximum principle and monotone decay on a sphere cap") {
        auto phi = [](const NormalPoint& p) {
            const double r2 = p.rho() * p.rho();
            return std::exp(-r2 / 0.02);
        };
        SolveOptions opts;
        opts.n_rho = 64;
        opts.n_theta = 64;
        const auto sol =
            solve(ModelSurface::sphere(1.0), 0.5, phi, {0.01, 0.05}, opts);
        REQUIRE(sol.max_principle_ok);
        REQUIRE(sol.monotone_decay_ok);
        for (const auto& d : sol.steps) {
            REQUIRE(d.sup <= sol.sup_phi * (1 + 1e-8));
            REQUIRE(d.residual <= 1e-10);
        }
    }

    SECTION("comparison principle within 1e-8") {
        auto phi_small = [](const NormalPoint& p) {
            return 0.8 * std::exp(-p.rho() * p.rho() / 1.6);
        };
        auto phi_big = [](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho() / 2.0);
        };
        SolveOptions opts;
        opts.n_rho = 48;
        opts.n_theta = 64;
        opts.dt = 1e-3;
        const auto s1 = solve(kFlat, 4.0, phi_small, {0.05, 0.1}, opts);
        const auto s2 = solve(kFlat, 4.0, phi_big, {0.05, 0.1}, opts);
        for (std::size_t k = 0; k < s1.snapshots.size(); ++k) {
            const Eigen::VectorXd diff =
                s1.snapshots[k].values - s2.snapshots[k].values;
            REQUIRE(diff.maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("log-hessian probe", "[heatflow]") {
    SECTION("flat gaussian flow has the closed-form log-hessian") {
        const double s = 0.5;
        auto phi = [s](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho() / (4 * s));
        };
        SolveOptions opts;
        opts.n_rho = 128;
        opts.n_theta = 64;
        const auto sol = solve(kFlat, 8.0, phi, {0.05, 0.1, 0.2}, opts);
        for (const auto& snap : sol.snapshots) {
            const double h = 4.0 * snap.grid.h_rho();
            const auto probe = probe_hessian_log(snap, 0.0, h);
            const double want = -1.0 / (2 * (s + snap.time));
            REQUIRE(probe.value == Approx(want).epsilon(0.02));
            REQUIRE(probe.value < 0.0);
        }
    }

    SECTION("radially symmetric log-concave data keep a nonpositive probe") {
        auto phi = [](const NormalPoint& p) {
            return std::exp(-2.0 * p.rho() * p.rho());
        };
        SolveOptions opts;
        opts.n_rho = 96;
        opts.n_theta = 64;
        const auto sol = solve(kFlat, 6.0, phi, {0.02, 0.1}, opts);
        for (const auto& snap : sol.snapshots) {
            const auto probe =
                probe_hessian_log(snap, 0.0, 4.0 * snap.grid.h_rho());
            REQUIRE(probe.value <= 0.0);
        }
    }

    SECTION("probe rejects nonpositive values and bad widths") {
        const PolarGrid grid(1.0, 32, 64);
        ScalarGridField zero(grid);
        REQUIRE_THROWS_AS(probe_hessian_log(zero, 0.0, 4 * grid.h_rho()),
                          ProbeError);
        auto one = ScalarGridField::sample(
            grid, [](const NormalPoint&) { return 1.0; });
        REQUIRE_THROWS_AS(probe_hessian_log(one, 0.0, 2 * grid.h_rho()),
                          ProbeError);
        REQUIRE_THROWS_AS(probe_hessian_log(one, 0.0, 0.6 * grid.R),
                          ProbeError);
    }

    SECTION("interpolation is exact at the nodes and smooth at the pole") {
        const PolarGrid grid(2.0, 32, 64);
        auto f = ScalarGridField::sample(grid, [](const NormalPoint& p) {
            return std::exp(-p.rho() * p.rho()) * (1.0 + 0.2 * p.xi1);
        });
        REQUIRE(interpolate(f, grid.rho(3), grid.theta(5)) ==
                Approx(f.at(3, 5)));
        // Crossing the pole: value along theta and theta+pi agree at rho=0.
        const double a = interpolate(f, 1e-12, 0.3);
        const double b = interpolate(f, 1e-12, 0.3 + std::numbers::pi);
        REQUIRE(a == Approx(b).margin(1e-10));
        // Against the sampled function off the nodes.
        auto exact = [](double rho, double th) {
            const double x = rho * std::cos(th);
            return std::exp(-rho * rho) * (1.0 + 0.2 * x);
        };
        for (double rho : {0.03, 0.41, 1.33})
            for (double th : {0.0, 0.7, 2.9}) {
                REQUIRE(interpolate(f, rho, th) ==
                        Approx(exact(rho, th)).margin(2e-5));
            }
    }
}
