#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "heatlab/errors.hpp"
#include "heatlab/geometry/model_surface.hpp"

namespace heatlab {

using ScalarField = std::function<double(const NormalPoint&)>;

namespace detail {

// Coordinate gradient and Hessian of f at p by 2nd-order central stencils.
struct CoordinateJet {
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
};

inline CoordinateJet coordinate_jet(const ModelSurface& surface,
                                    const ScalarField& f, const NormalPoint& p,
                                    double h) {
    const NormalPoint checks[4] = {{p.xi1 + 2 * h, p.xi2},
                                   {p.xi1 - 2 * h, p.xi2},
                                   {p.xi1, p.xi2 + 2 * h},
                                   {p.xi1, p.xi2 - 2 * h}};
    for (const auto& c : checks)
        if (!surface.contains(c))
            throw ChartDomainError("finite-difference stencil exits the chart");

    auto F = [&](double a, double b) { return f({p.xi1 + a, p.xi2 + b}); };
    const double f0 = F(0, 0);
    CoordinateJet jet;
    jet.grad[0] = (F(h, 0) - F(-h, 0)) / (2 * h);
    jet.grad[1] = (F(0, h) - F(0, -h)) / (2 * h);
    jet.hess(0, 0) = (F(h, 0) - 2 * f0 + F(-h, 0)) / (h * h);
    jet.hess(1, 1) = (F(0, h) - 2 * f0 + F(0, -h)) / (h * h);
    jet.hess(0, 1) = jet.hess(1, 0) =
        (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4 * h * h);
    return jet;
}

} // namespace detail

// Hess_M f(v, w)(p) with v, w given in chart coordinates.
inline double covariant_hessian(const ModelSurface& surface,
                                const ScalarField& f, const NormalPoint& p,
                                const Eigen::Vector2d& v,
                                const Eigen::Vector2d& w, double step = 0.0) {
    surface.require_inside(p);
    const double h = step > 0 ? step : surface.fd_step();
    const auto jet = detail::coordinate_jet(surface, f, p, h);
    const Christoffel G = christoffel_at(surface, p);
    double out = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double hij = jet.hess(i, j);
            for (int k = 0; k < 2; ++k) hij -= G.gamma(k, i, j) * jet.grad[k];
            out += hij * v[i] * w[j];
        }
    return out;
}

// Full covariant Hessian matrix in the coordinate frame at p.
inline Eigen::Matrix2d covariant_hessian_matrix(const ModelSurface& surface,
                                                const ScalarField& f,
                                                const NormalPoint& p,
                                                double step = 0.0) {
    surface.require_inside(p);
    const double h = step > 0 ? step : surface.fd_step();
    const auto jet = detail::coordinate_jet(surface, f, p, h);
    const Christoffel G = christoffel_at(surface, p);
    Eigen::Matrix2d out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double hij = jet.hess(i, j);
            for (int k = 0; k < 2; ++k) hij -= G.gamma(k, i, j) * jet.grad[k];
            out(i, j) = hij;
        }
    return out;
}

inline double laplace_beltrami(const ModelSurface& surface,
                               const ScalarField& f, const NormalPoint& p,
                               double step = 0.0) {
    const Eigen::Matrix2d H = covariant_hessian_matrix(surface, f, p, step);
    const MetricData m = metric_at(surface, p);
    return (m.g_inv.array() * H.array()).sum();
}

inline double grad_norm_sq(const ModelSurface& surface, const ScalarField& f,
                           const NormalPoint& p, double step = 0.0) {
    surface.require_inside(p);
    const double h = step > 0 ? step : surface.fd_step();
    const auto jet = detail::coordinate_jet(surface, f, p, h);
    const MetricData m = metric_at(surface, p);
    return jet.grad.dot(m.g_inv * jet.grad);
}

} // namespace heatlab
