#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "heatlab/errors.hpp"

namespace heatlab {

enum class SurfaceKind { Flat, Sphere, Hyperbolic };

// Point of the normal chart at the base point o, in Cartesian chart
// coordinates xi = (xi1, xi2).
struct NormalPoint {
    double xi1 = 0.0;
    double xi2 = 0.0;

    double rho() const { return std::hypot(xi1, xi2); }
    double angle() const { return std::atan2(xi2, xi1); }

    static NormalPoint polar(double rho, double theta) {
        return {rho * std::cos(theta), rho * std::sin(theta)};
    }
};

namespace detail {

// Everything below is analytic in w = K*rho^2, which makes the three
// curvature signs share one code path. Series branches take over for small
// |w| where the closed forms cancel.

// sin(x)^2/x^2 with x^2 = w; equals the tangential metric eigenvalue.
inline double tangential_factor(double w) {
    if (std::abs(w) < 0.09) {
        return 1.0 + w * (-1.0 / 3.0 +
               w * (2.0 / 45.0 +
               w * (-1.0 / 315.0 +
               w * (2.0 / 14175.0 - w / 467775.0 * 2.0))));
    }
    const double x = std::sqrt(std::abs(w));
    const double s = w > 0 ? std::sin(x) : std::sinh(x);
    return s * s / std::abs(w);
}

// d/drho of tangential_factor(K rho^2).
inline double tangential_factor_drho(double K, double rho) {
    const double w = K * rho * rho;
    if (std::abs(w) < 0.09) {
        // 2 K rho * d(phi)/dw
        const double dphi_dw = -1.0 / 3.0 +
            w * (4.0 / 45.0 +
            w * (-3.0 / 315.0 +
            w * (8.0 / 14175.0 - w * 10.0 / 467775.0)));
        return 2.0 * K * rho * dphi_dw;
    }
    const double S = [&] {
        const double x = std::sqrt(std::abs(K)) * rho;
        if (K > 0) return std::sin(x) / std::sqrt(K);
        return std::sinh(x) / std::sqrt(-K);
    }();
    const double Sp = [&] {
        const double x = std::sqrt(std::abs(K)) * rho;
        return K > 0 ? std::cos(x) : std::cosh(x);
    }();
    return 2.0 * S * (Sp * rho - S) / (rho * rho * rho);
}

// (1 - tangential_factor)/rho, the radial-tangential coupling coefficient.
inline double one_minus_factor_over_rho(double K, double rho) {
    const double w = K * rho * rho;
    if (std::abs(w) < 0.09) {
        return K * rho * (1.0 / 3.0 +
               w * (-2.0 / 45.0 +
               w * (1.0 / 315.0 - w * 2.0 / 14175.0)));
    }
    return (1.0 - tangential_factor(w)) / rho;
}

// Warp S_K(rho): radius of the geodesic circle of radius rho.
inline double warp(double K, double rho) {
    if (K == 0.0) return rho;
    const double x = std::sqrt(std::abs(K)) * rho;
    return K > 0 ? std::sin(x) / std::sqrt(K) : std::sinh(x) / std::sqrt(-K);
}

inline double warp_prime(double K, double rho) {
    if (K == 0.0) return 1.0;
    const double x = std::sqrt(std::abs(K)) * rho;
    return K > 0 ? std::cos(x) : std::cosh(x);
}

// Integral of S_K from 0 to r (area of a geodesic disk over 2*pi).
inline double warp_integral(double K, double r) {
    const double w = K * r * r;
    if (std::abs(w) < 0.09) {
        return 0.5 * r * r *
               (1.0 + w * (-1.0 / 12.0 + w * (1.0 / 360.0 - w / 20160.0)));
    }
    const double x = std::sqrt(std::abs(w));
    return K > 0 ? (1.0 - std::cos(x)) / K : (std::cosh(x) - 1.0) / (-K);
}

} // namespace detail

// A 2D constant-curvature surface presented in a normal chart at o.
struct ModelSurface {
    SurfaceKind kind = SurfaceKind::Flat;
    double K = 0.0;           // sectional curvature
    double chart_radius = 0.0;

    static ModelSurface flat(double chart_radius = 32.0) {
        if (!(chart_radius > 0))
            throw ChartDomainError("flat surface: chart_radius must be positive");
        return {SurfaceKind::Flat, 0.0, chart_radius};
    }

    static ModelSurface sphere(double K, double chart_radius = -1.0) {
        if (!(K > 0)) throw InvalidCurvatureError("sphere requires K > 0");
        const double limit = std::numbers::pi / std::sqrt(K);
        if (chart_radius < 0) chart_radius = 0.98 * limit;
        if (!(chart_radius > 0 && chart_radius < limit))
            throw ChartDomainError("sphere: chart_radius must lie in (0, pi/sqrt(K))");
        return {SurfaceKind::Sphere, K, chart_radius};
    }

    static ModelSurface hyperbolic(double K, double chart_radius = 32.0) {
        if (!(K < 0)) throw InvalidCurvatureError("hyperbolic requires K < 0");
        if (!(chart_radius > 0))
            throw ChartDomainError("hyperbolic surface: chart_radius must be positive");
        return {SurfaceKind::Hyperbolic, K, chart_radius};
    }

    static ModelSurface of_curvature(double K) {
        if (K > 0) return sphere(K);
        if (K < 0) return hyperbolic(K);
        return flat();
    }

    bool contains(const NormalPoint& p) const { return p.rho() < chart_radius; }

    void require_inside(const NormalPoint& p) const {
        if (!contains(p))
            throw ChartDomainError("point outside the normal chart");
    }

    // Balls of this radius around o are strongly convex; geodesic endpoints
    // must stay within it so minimal geodesics are unique.
    double convexity_radius() const {
        if (kind == SurfaceKind::Sphere) {
            const double quarter = 0.5 * std::numbers::pi / std::sqrt(K);
            return std::min(chart_radius, 0.98 * quarter);
        }
        return chart_radius;
    }

    // Step used by the finite-difference covariant operators.
    double fd_step() const { return std::max(1e-4, 1e-5 * chart_radius); }

    double warp(double rho) const { return detail::warp(K, rho); }
    double warp_prime(double rho) const { return detail::warp_prime(K, rho); }
    double warp_integral(double r) const { return detail::warp_integral(K, r); }
};

struct MetricData {
    Eigen::Matrix2d g;
    Eigen::Matrix2d g_inv;
    double sqrt_det;
};

// Metric in Cartesian chart coordinates: g = phi * I + (1-phi) n n^T with
// phi = S_K(rho)^2 / rho^2 and n the radial unit vector.
inline MetricData metric_at(const ModelSurface& surface, const NormalPoint& p) {
    surface.require_inside(p);
    const double rho = p.rho();
    MetricData out;
    if (rho == 0.0) {
        out.g = Eigen::Matrix2d::Identity();
        out.g_inv = Eigen::Matrix2d::Identity();
        out.sqrt_det = 1.0;
        return out;
    }
    const double phi = detail::tangential_factor(surface.K * rho * rho);
    const double n1 = p.xi1 / rho, n2 = p.xi2 / rho;
    out.g(0, 0) = phi + (1.0 - phi) * n1 * n1;
    out.g(1, 1) = phi + (1.0 - phi) * n2 * n2;
    out.g(0, 1) = out.g(1, 0) = (1.0 - phi) * n1 * n2;
    const double inv_phi = 1.0 / phi;
    out.g_inv(0, 0) = inv_phi + (1.0 - inv_phi) * n1 * n1;
    out.g_inv(1, 1) = inv_phi + (1.0 - inv_phi) * n2 * n2;
    out.g_inv(0, 1) = out.g_inv(1, 0) = (1.0 - inv_phi) * n1 * n2;
    out.sqrt_det = surface.warp(rho) / rho;
    return out;
}

// Christoffel symbols gamma(k, i, j) = Gamma^k_ij, symmetric in (i, j).
struct Christoffel {
    double c[2][2][2] = {};
    double gamma(int k, int i, int j) const { return c[k][i][j]; }
};

inline Christoffel christoffel_at(const ModelSurface& surface,
                                  const NormalPoint& p) {
    surface.require_inside(p);
    Christoffel out;
    const double rho = p.rho();
    if (rho == 0.0) return out; // exact at the base point
    const double phi = detail::tangential_factor(surface.K * rho * rho);
    const double dphi = detail::tangential_factor_drho(surface.K, rho);
    const double coupl = detail::one_minus_factor_over_rho(surface.K, rho);
    const double n[2] = {p.xi1 / rho, p.xi2 / rho};
    double P[2][2];
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            P[a][b] = (a == b ? 1.0 : 0.0) - n[a] * n[b];
    const double radial = dphi / (2.0 * phi);
    const double mixed = coupl - 0.5 * dphi;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.c[k][i][j] = radial * (n[i] * P[j][k] + n[j] * P[i][k]) +
                                 mixed * P[i][j] * n[k];
    return out;
}

} // namespace heatlab
