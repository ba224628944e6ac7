#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

// Initial datum for the Euclidean heat semigroup. The support interval may
// be infinite only for bounded data; the quadrature truncates at the kernel
// width in that case.
struct EuclideanDatum1D {
    std::function<double(double)> f;
    double support_lo = -kInf;
    double support_hi = kInf;
    bool bounded = true;
    // Set when f is exp(-x^2/(4s)): evolution then uses the closed form.
    std::optional<double> gaussian_s;
};

struct EuclideanDatum2D {
    std::function<double(double, double)> f;
    double support_radius = 0.0; // support contained in this centered ball
    std::optional<double> gaussian_s;
};

// Closed-form heat evolution of exp(-|x|^2/(4s)) in n dimensions.
inline double gaussian_semigroup(int n, double s, double t, double dist_sq) {
    if (!(s > 0) || !(t > 0))
        throw ChartDomainError("gaussian semigroup needs s, t > 0");
    return std::pow(s / (s + t), 0.5 * n) * std::exp(-dist_sq / (4 * (s + t)));
}

inline double euclidean_semigroup(const EuclideanDatum1D& phi, double t,
                                  double x) {
    if (!(t > 0)) throw ChartDomainError("semigroup time must be positive");
    if (phi.gaussian_s) return gaussian_semigroup(1, *phi.gaussian_s, t, x * x);
    if (!phi.bounded &&
        (std::isinf(phi.support_lo) || std::isinf(phi.support_hi)))
        throw ChartDomainError("unbounded datum with unbounded support");
    const double width = 42.0 * std::sqrt(t);
    const double lo = std::max(phi.support_lo, x - width);
    const double hi = std::min(phi.support_hi, x + width);
    if (!(lo < hi)) return 0.0;
    const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
    return norm * numerics::integrate(
                      [&](double y) {
                          const double d = x - y;
                          return phi.f(y) * std::exp(-d * d / (4 * t));
                      },
                      lo, hi, 1e-12);
}

inline double euclidean_semigroup(const EuclideanDatum2D& phi, double t,
                                  double x1, double x2) {
    if (!(t > 0)) throw ChartDomainError("semigroup time must be positive");
    if (phi.gaussian_s)
        return gaussian_semigroup(2, *phi.gaussian_s, t, x1 * x1 + x2 * x2);
    if (!(phi.support_radius > 0) || std::isinf(phi.support_radius))
        throw ChartDomainError("2d datum needs a finite support radius");
    const double b = phi.support_radius;
    const double width = 42.0 * std::sqrt(t);
    const double lo1 = std::max(-b, x1 - width), hi1 = std::min(b, x1 + width);
    const double lo2 = std::max(-b, x2 - width), hi2 = std::min(b, x2 + width);
    if (!(lo1 < hi1) || !(lo2 < hi2)) return 0.0;

    // Nested adaptive quadrature over the kernel window; log-values of the
    // result feed second differences, so the tolerance is kept tight.
    const double norm = 1.0 / (4.0 * std::numbers::pi * t);
    auto outer = [&](double y1) {
        const double d1 = x1 - y1;
        return numerics::integrate(
            [&](double y2) {
                const double d2 = x2 - y2;
                return phi.f(y1, y2) *
                       std::exp(-(d1 * d1 + d2 * d2) / (4 * t));
            },
            lo2, hi2, 1e-12);
    };
    return norm * numerics::integrate(outer, lo1, hi1, 1e-12);
}

} // namespace heatlab
