#pragma once

#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "heatlab/errors.hpp"
#include "heatlab/heatflow/polar_grid.hpp"

namespace heatlab {

// Discrete Laplace-Beltrami on the polar grid, divergence (finite-volume)
// form, Dirichlet ring eliminated. Row scaling by the node measures makes
// the matrix exactly symmetric in the sqrt(det g)-weighted inner product:
// flux between two nodes enters both rows with the same magnitude.
struct DiscreteOperator {
    PolarGrid grid;
    ModelSurface surface;
    Eigen::SparseMatrix<double> L;  // unknowns x unknowns
    Eigen::VectorXd measure;        // control-volume measures per unknown

    Eigen::VectorXd restrict_field(const ScalarGridField& f) const {
        return f.values.head(grid.unknowns());
    }

    ScalarGridField extend_field(const Eigen::VectorXd& u, double t) const {
        ScalarGridField out(grid, t);
        out.values.head(grid.unknowns()) = u;
        return out;
    }

    double mass(const Eigen::VectorXd& u) const { return measure.dot(u); }
};

inline DiscreteOperator assemble_operator(const ModelSurface& surface,
                                          const PolarGrid& grid) {
    if (!(grid.R < surface.chart_radius))
        throw ChartDomainError("grid radius reaches outside the chart");

    const int n_rho = grid.n_rho, n_theta = grid.n_theta;
    const double h = grid.h_rho(), ht = grid.h_theta();
    const int N = grid.unknowns();

    DiscreteOperator op;
    op.grid = grid;
    op.surface = surface;
    op.measure = Eigen::VectorXd::Zero(N);
    op.measure[0] = 2.0 * std::numbers::pi * surface.warp_integral(0.5 * h);
    for (int i = 1; i < n_rho; ++i) {
        const double m = surface.warp(grid.rho(i)) * h * ht;
        for (int j = 0; j < n_theta; ++j) op.measure[grid.node_index(i, j)] = m;
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(N) * 5);

    // Pole row: theta-averaged radial flux through the circle at h/2.
    {
        const double flux = surface.warp(0.5 * h) * ht / h; // per neighbor
        const double c = flux / op.measure[0];
        for (int j = 0; j < n_theta; ++j) {
            trip.emplace_back(0, grid.node_index(1, j), c);
            trip.emplace_back(0, 0, -c);
        }
    }

    for (int i = 1; i < n_rho; ++i) {
        const double S_i = surface.warp(grid.rho(i));
        const double S_out = surface.warp(grid.rho(i) + 0.5 * h);
        const double S_in = surface.warp(grid.rho(i) - 0.5 * h);
        const double c_out = S_out / (h * h * S_i);
        const double c_in = S_in / (h * h * S_i);
        const double c_th = 1.0 / (S_i * S_i * ht * ht);
        for (int j = 0; j < n_theta; ++j) {
            const int row = grid.node_index(i, j);
            if (i + 1 < n_rho)
                trip.emplace_back(row, grid.node_index(i + 1, j), c_out);
            // else: Dirichlet neighbor, value 0, diagonal loss only
            trip.emplace_back(row, row, -c_out);
            trip.emplace_back(row, i == 1 ? 0 : grid.node_index(i - 1, j), c_in);
            trip.emplace_back(row, row, -c_in);
            trip.emplace_back(row, grid.node_index(i, j + 1), c_th);
            trip.emplace_back(row, grid.node_index(i, j - 1), c_th);
            trip.emplace_back(row, row, -2.0 * c_th);
        }
    }

    op.L.resize(N, N);
    op.L.setFromTriplets(trip.begin(), trip.end());
    op.L.makeCompressed();
    return op;
}

// Smallest Dirichlet eigenvalue of -L by inverse power iteration with the
// measure-weighted Rayleigh quotient.
inline double smallest_dirichlet_eigenvalue(const DiscreteOperator& op,
                                            int iterations = 60) {
    Eigen::SparseMatrix<double> A = -op.L;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw NumericalError("factorization failed in eigenvalue probe", 0.0);
    Eigen::VectorXd u = Eigen::VectorXd::Ones(A.rows());
    for (int k = 0; k < iterations; ++k) {
        u = lu.solve(u);
        u /= u.norm();
    }
    const Eigen::VectorXd Au = A * u;
    const Eigen::VectorXd Wu = op.measure.asDiagonal() * u;
    return Au.dot(Wu) / u.dot(Wu);
}

} // namespace heatlab
