#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "heatlab/errors.hpp"
#include "heatlab/geometry/model_surface.hpp"

namespace heatlab {

// Uniform polar grid over a geodesic ball: a single shared pole node, rings
// i = 1..n_rho at rho_i = i R/n_rho, and the Dirichlet ring at i = n_rho.
struct PolarGrid {
    double R = 0.0;
    int n_rho = 0;
    int n_theta = 0;

    PolarGrid() = default;
    PolarGrid(double radius, int nr, int nt) : R(radius), n_rho(nr), n_theta(nt) {
        if (!(R > 0)) throw ChartDomainError("grid radius must be positive");
        if (n_rho < 32 || n_theta < 64)
            throw ChartDomainError("grid resolution below n_rho=32, n_theta=64");
        if (n_theta % 4 != 0)
            throw ChartDomainError("n_theta must be a multiple of 4");
    }

    double h_rho() const { return R / n_rho; }
    double h_theta() const { return 2.0 * std::numbers::pi / n_theta; }
    double rho(int i) const { return i * h_rho(); }
    double theta(int j) const { return j * h_theta(); }

    int size() const { return 1 + n_rho * n_theta; }          // incl. boundary
    int unknowns() const { return 1 + (n_rho - 1) * n_theta; } // Dirichlet out

    int node_index(int i, int j) const {
        if (i == 0) return 0;
        j %= n_theta;
        if (j < 0) j += n_theta;
        return 1 + (i - 1) * n_theta + j;
    }

    NormalPoint point(int i, int j) const {
        return NormalPoint::polar(rho(i), theta(j));
    }
};

// Scalar samples on a polar grid; boundary-ring values are kept explicitly
// and must vanish for evolved fields.
struct ScalarGridField {
    PolarGrid grid;
    Eigen::VectorXd values;
    double time = 0.0;

    ScalarGridField() = default;

    explicit ScalarGridField(const PolarGrid& g, double t = 0.0)
        : grid(g), values(Eigen::VectorXd::Zero(g.size())), time(t) {}

    static ScalarGridField sample(const PolarGrid& g,
                                  const std::function<double(const NormalPoint&)>& f,
                                  double t = 0.0) {
        ScalarGridField out(g, t);
        out.values[0] = f({0.0, 0.0});
        for (int i = 1; i <= g.n_rho; ++i)
            for (int j = 0; j < g.n_theta; ++j)
                out.values[g.node_index(i, j)] = f(g.point(i, j));
        return out;
    }

    double at(int i, int j) const { return values[grid.node_index(i, j)]; }
    double& at(int i, int j) { return values[grid.node_index(i, j)]; }

    void zero_boundary() {
        for (int j = 0; j < grid.n_theta; ++j)
            values[grid.node_index(grid.n_rho, j)] = 0.0;
    }

    double boundary_max_abs() const {
        double m = 0.0;
        for (int j = 0; j < grid.n_theta; ++j)
            m = std::max(m, std::abs(values[grid.node_index(grid.n_rho, j)]));
        return m;
    }

    double sup() const { return values.maxCoeff(); }
    double inf() const { return values.minCoeff(); }
};

} // namespace heatlab
