#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "heatlab/errors.hpp"
#include "heatlab/heatflow/operator.hpp"
#include "heatlab/heatflow/polar_grid.hpp"

namespace heatlab {

// One implicit step of the heat equation; the factorizations are reused
// across steps since the operator does not depend on time.
class HeatStepper {
  public:
    HeatStepper(const ModelSurface& surface, const PolarGrid& grid, double dt)
        : op_(assemble_operator(surface, grid)), dt_(dt) {
        if (!(dt > 0)) throw ChartDomainError("time step must be positive");
        const int N = grid.unknowns();
        Eigen::SparseMatrix<double> I(N, N);
        I.setIdentity();
        cn_lhs_ = I - 0.5 * dt * op_.L;
        cn_rhs_ = I + 0.5 * dt * op_.L;
        be_lhs_ = I - dt * op_.L;
        cn_lu_.compute(cn_lhs_);
        be_lu_.compute(be_lhs_);
        if (cn_lu_.info() != Eigen::Success || be_lu_.info() != Eigen::Success)
            throw NumericalError("sparse factorization failed", 0.0);
    }

    const DiscreteOperator& op() const { return op_; }
    double dt() const { return dt_; }

    // Crank-Nicolson by default; backward Euler damps startup ringing from
    // discontinuous data.
    Eigen::VectorXd step(const Eigen::VectorXd& u, bool backward_euler,
                         double* residual_out = nullptr) const {
        const Eigen::VectorXd rhs = backward_euler ? u : (cn_rhs_ * u).eval();
        const auto& lu = backward_euler ? be_lu_ : cn_lu_;
        const auto& lhs = backward_euler ? be_lhs_ : cn_lhs_;
        Eigen::VectorXd v = lu.solve(rhs);
        const double rhs_norm = std::max(rhs.norm(), 1e-300);
        const double residual = (lhs * v - rhs).norm() / rhs_norm;
        if (residual_out) *residual_out = residual;
        if (!(residual <= 1e-10))
            throw NumericalError("linear solve residual too large", residual);
        return v;
    }

    ScalarGridField advance(const ScalarGridField& state,
                            bool backward_euler = false) const {
        if (state.boundary_max_abs() != 0.0)
            throw ChartDomainError("advance needs a boundary-clean state");
        double residual = 0.0;
        const Eigen::VectorXd u =
            step(op_.restrict_field(state), backward_euler, &residual);
        return op_.extend_field(u, state.time + dt_);
    }

  private:
    DiscreteOperator op_;
    double dt_;
    Eigen::SparseMatrix<double> cn_lhs_, cn_rhs_, be_lhs_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> cn_lu_, be_lu_;
};

struct StepDiagnostics {
    double t = 0.0;
    double sup = 0.0;
    double mass = 0.0;
    double residual = 0.0;
};

struct SolveOptions {
    int n_rho = 128;
    int n_theta = 64;
    double dt = 0.0; // 0 resolves to 0.25 * h_rho^2
    int startup_backward_euler_steps = 0;
    std::optional<double> jump_radius; // one-cell mollification of a jump
    bool strict = true;
    double max_principle_tol = 1e-8; // relative to sup of the datum
    std::function<void(double, const ScalarGridField&)> observer;
};

struct HeatSolution {
    PolarGrid grid;
    std::vector<ScalarGridField> snapshots;
    std::vector<StepDiagnostics> steps;
    double sup_phi = 0.0;
    double dt = 0.0;
    double mollification_radius = 0.0;
    bool max_principle_ok = true;
    bool monotone_decay_ok = true;

    const ScalarGridField& at_time(double t) const {
        for (const auto& s : snapshots)
            if (std::abs(s.time - t) <= 1e-9 * (1.0 + t)) return s;
        throw ProbeError("no snapshot stored at the requested time");
    }
};

// Dirichlet heat flow on the geodesic ball of radius R: nodal projection of
// the datum, fixed-step march, per-step diagnostics, snapshots at the
// requested times.
inline HeatSolution solve(const ModelSurface& surface, double R,
                          const std::function<double(const NormalPoint&)>& phi,
                          std::vector<double> times,
                          const SolveOptions& opts = {}) {
    if (times.empty()) throw ChartDomainError("no snapshot times requested");
    std::sort(times.begin(), times.end());
    if (!(times.front() >= 0.0))
        throw ChartDomainError("snapshot times must be nonnegative");

    const PolarGrid grid(R, opts.n_rho, opts.n_theta);
    const double dt = opts.dt > 0 ? opts.dt : 0.25 * grid.h_rho() * grid.h_rho();

    HeatSolution sol;
    sol.grid = grid;
    sol.dt = dt;

    ScalarGridField state = ScalarGridField::sample(grid, phi);
    if (opts.jump_radius) {
        // Linear one-cell ramp across the datum's jump circle; the radius is
        // reported so its effect can be refined away.
        const double h = grid.h_rho(), delta = *opts.jump_radius;
        sol.mollification_radius = h;
        for (int i = 1; i <= grid.n_rho; ++i) {
            const double w =
                std::clamp((delta - grid.rho(i)) / h + 0.5, 0.0, 1.0);
            for (int j = 0; j < grid.n_theta; ++j) state.at(i, j) *= w;
        }
    }
    state.zero_boundary();
    for (int k = 0; k < state.values.size(); ++k)
        if (!std::isfinite(state.values[k]) || state.values[k] < 0.0)
            throw ChartDomainError("datum must be finite and nonnegative");

    const HeatStepper stepper(surface, grid, dt);
    const auto& op = stepper.op();
    Eigen::VectorXd u = op.restrict_field(state);
    sol.sup_phi = std::max(u.maxCoeff(), 0.0);

    double t = 0.0;
    sol.steps.push_back({0.0, u.maxCoeff(), op.mass(u), 0.0});
    std::size_t next_snapshot = 0;
    while (next_snapshot < times.size() && times[next_snapshot] <= 0.0) {
        sol.snapshots.push_back(op.extend_field(u, 0.0));
        ++next_snapshot;
    }

    const double sup_tol = opts.max_principle_tol * (sol.sup_phi + 1e-300);
    double prev_sup = u.maxCoeff();
    double prev_mass = op.mass(u);
    int step_index = 0;
    while (next_snapshot < times.size()) {
        double residual = 0.0;
        const bool be = step_index < opts.startup_backward_euler_steps;
        u = stepper.step(u, be, &residual);
        t += dt;
        ++step_index;

        const double sup = u.maxCoeff();
        const double low = u.minCoeff();
        const double mass = op.mass(u);
        sol.steps.push_back({t, sup, mass, residual});

        if (low < -sup_tol || sup > sol.sup_phi + sup_tol)
            sol.max_principle_ok = false;
        if (sup > prev_sup + sup_tol || mass > prev_mass * (1.0 + 1e-10) + 1e-300)
            sol.monotone_decay_ok = false;
        if (opts.strict && !(sol.max_principle_ok && sol.monotone_decay_ok))
            throw NumericalError("solution invariant breached at t=" +
                                     std::to_string(t),
                                 std::min(-low, sup - sol.sup_phi));
        prev_sup = std::max(sup, 0.0);
        prev_mass = mass;

        if (opts.observer) opts.observer(t, op.extend_field(u, t));
        while (next_snapshot < times.size() &&
               t >= times[next_snapshot] - 1e-12) {
            sol.snapshots.push_back(op.extend_field(u, t));
            ++next_snapshot;
        }
    }
    return sol;
}

} // namespace heatlab
