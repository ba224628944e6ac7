#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "heatlab/errors.hpp"
#include "heatlab/geometry/model_surface.hpp"

namespace heatlab {

namespace detail {

// Ambient models: the round sphere of radius 1/sqrt(K) in R^3 and the
// hyperboloid of "radius" 1/sqrt(-K) in Minkowski R^{2,1}, both with the
// base point on the vertical axis. Chart points map through the exponential.
struct Ambient3 {
    double x = 0, y = 0, z = 0;
};

inline Ambient3 sphere_embed(double K, const NormalPoint& p) {
    const double a = 1.0 / std::sqrt(K);
    const double rho = p.rho();
    if (rho == 0.0) return {0, 0, a};
    const double c = std::cos(rho / a), s = std::sin(rho / a);
    return {a * s * p.xi1 / rho, a * s * p.xi2 / rho, a * c};
}

inline NormalPoint sphere_chart(double K, const Ambient3& q) {
    const double a = 1.0 / std::sqrt(K);
    const double r_xy = std::hypot(q.x, q.y);
    const double rho = a * std::atan2(r_xy, q.z);
    if (r_xy == 0.0) return {0.0, 0.0};
    return {rho * q.x / r_xy, rho * q.y / r_xy};
}

inline Ambient3 hyperboloid_embed(double K, const NormalPoint& p) {
    const double a = 1.0 / std::sqrt(-K);
    const double rho = p.rho();
    if (rho == 0.0) return {0, 0, a};
    const double c = std::cosh(rho / a), s = std::sinh(rho / a);
    return {a * s * p.xi1 / rho, a * s * p.xi2 / rho, a * c};
}

inline NormalPoint hyperboloid_chart(double K, const Ambient3& q) {
    const double a = 1.0 / std::sqrt(-K);
    const double r_xy = std::hypot(q.x, q.y);
    const double rho = a * std::asinh(r_xy / a);
    if (r_xy == 0.0) return {0.0, 0.0};
    return {rho * q.x / r_xy, rho * q.y / r_xy};
}

} // namespace detail

// Constant-speed minimal geodesic c: [0,1] -> chart with c(0)=p, c(1)=q.
class Geodesic {
  public:
    Geodesic(const ModelSurface& surface, NormalPoint p, NormalPoint q)
        : surface_(surface), p_(p), q_(q) {
        const double guard = surface.convexity_radius();
        if (p.rho() > guard || q.rho() > guard)
            throw ChartDomainError(
                "geodesic endpoints outside the strong convexity guard");
        if (surface.kind == SurfaceKind::Sphere) {
            const double a = 1.0 / std::sqrt(surface.K);
            const auto P = detail::sphere_embed(surface.K, p);
            const auto Q = detail::sphere_embed(surface.K, q);
            double dot = (P.x * Q.x + P.y * Q.y + P.z * Q.z) / (a * a);
            dot = std::clamp(dot, -1.0, 1.0);
            angle_ = std::acos(dot);
            length_ = a * angle_;
        } else if (surface.kind == SurfaceKind::Hyperbolic) {
            const double a = 1.0 / std::sqrt(-surface.K);
            const auto P = detail::hyperboloid_embed(surface.K, p);
            const auto Q = detail::hyperboloid_embed(surface.K, q);
            double dot = (P.z * Q.z - P.x * Q.x - P.y * Q.y) / (a * a);
            dot = std::max(dot, 1.0);
            angle_ = std::acosh(dot);
            length_ = a * angle_;
        } else {
            length_ = std::hypot(q.xi1 - p.xi1, q.xi2 - p.xi2);
        }
    }

    const NormalPoint& start() const { return p_; }
    const NormalPoint& end() const { return q_; }
    double length() const { return length_; }

    NormalPoint point_at(double tau) const {
        if (tau <= 0.0) return p_;
        if (tau >= 1.0) return q_;
        switch (surface_.kind) {
            case SurfaceKind::Flat:
                return {(1 - tau) * p_.xi1 + tau * q_.xi1,
                        (1 - tau) * p_.xi2 + tau * q_.xi2};
            case SurfaceKind::Sphere: {
                if (angle_ < 1e-14)
                    return {(1 - tau) * p_.xi1 + tau * q_.xi1,
                            (1 - tau) * p_.xi2 + tau * q_.xi2};
                const auto P = detail::sphere_embed(surface_.K, p_);
                const auto Q = detail::sphere_embed(surface_.K, q_);
                const double s = std::sin(angle_);
                const double wp = std::sin((1 - tau) * angle_) / s;
                const double wq = std::sin(tau * angle_) / s;
                return detail::sphere_chart(
                    surface_.K, {wp * P.x + wq * Q.x, wp * P.y + wq * Q.y,
                                 wp * P.z + wq * Q.z});
            }
            case SurfaceKind::Hyperbolic: {
                if (angle_ < 1e-14)
                    return {(1 - tau) * p_.xi1 + tau * q_.xi1,
                            (1 - tau) * p_.xi2 + tau * q_.xi2};
                const auto P = detail::hyperboloid_embed(surface_.K, p_);
                const auto Q = detail::hyperboloid_embed(surface_.K, q_);
                const double s = std::sinh(angle_);
                const double wp = std::sinh((1 - tau) * angle_) / s;
                const double wq = std::sinh(tau * angle_) / s;
                return detail::hyperboloid_chart(
                    surface_.K, {wp * P.x + wq * Q.x, wp * P.y + wq * Q.y,
                                 wp * P.z + wq * Q.z});
            }
        }
        return p_;
    }

    std::vector<NormalPoint> sample(int count) const {
        std::vector<NormalPoint> out;
        out.reserve(count);
        for (int i = 0; i < count; ++i)
            out.push_back(point_at(double(i) / (count - 1)));
        return out;
    }

  private:
    ModelSurface surface_;
    NormalPoint p_, q_;
    double angle_ = 0.0;
    double length_ = 0.0;
};

inline Geodesic geodesic(const ModelSurface& surface, const NormalPoint& p,
                         const NormalPoint& q) {
    return Geodesic(surface, p, q);
}

// Boundary-value solve by RK4 shooting on the geodesic equation with a
// 2x2 Newton iteration on the initial velocity. Kept as the fallback route
// for metrics without an ambient model and as an independent cross-check.
inline std::vector<NormalPoint> geodesic_shooting(const ModelSurface& surface,
                                                  const NormalPoint& p,
                                                  const NormalPoint& q,
                                                  int n_samples = 65,
                                                  int n_steps = 256) {
    const double guard = surface.convexity_radius();
    if (p.rho() > guard || q.rho() > guard)
        throw ChartDomainError(
            "geodesic endpoints outside the strong convexity guard");
    n_steps = ((n_steps + n_samples - 2) / (n_samples - 1)) * (n_samples - 1);

    using State = std::array<double, 4>; // (xi1, xi2, v1, v2)
    auto rhs = [&](const State& s) -> State {
        const Christoffel G = christoffel_at(surface, {s[0], s[1]});
        const double v[2] = {s[2], s[3]};
        double acc[2] = {0.0, 0.0};
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    acc[k] -= G.gamma(k, i, j) * v[i] * v[j];
        return {s[2], s[3], acc[0], acc[1]};
    };
    auto integrate = [&](double v1, double v2,
                         std::vector<NormalPoint>* path) -> NormalPoint {
        State s = {p.xi1, p.xi2, v1, v2};
        const double h = 1.0 / n_steps;
        if (path) {
            path->clear();
            path->push_back({s[0], s[1]});
        }
        const int save_every = n_steps / (n_samples - 1);
        for (int step = 0; step < n_steps; ++step) {
            const State k1 = rhs(s);
            State s2;
            for (int i = 0; i < 4; ++i) s2[i] = s[i] + 0.5 * h * k1[i];
            const State k2 = rhs(s2);
            State s3;
            for (int i = 0; i < 4; ++i) s3[i] = s[i] + 0.5 * h * k2[i];
            const State k3 = rhs(s3);
            State s4;
            for (int i = 0; i < 4; ++i) s4[i] = s[i] + h * k3[i];
            const State k4 = rhs(s4);
            for (int i = 0; i < 4; ++i)
                s[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            if (path && (step + 1) % save_every == 0)
                path->push_back({s[0], s[1]});
        }
        return {s[0], s[1]};
    };

    double v1 = q.xi1 - p.xi1, v2 = q.xi2 - p.xi2;
    const double scale = std::max(std::hypot(v1, v2), 1e-12);
    for (int it = 0; it < 40; ++it) {
        const NormalPoint hit = integrate(v1, v2, nullptr);
        const double r1 = hit.xi1 - q.xi1, r2 = hit.xi2 - q.xi2;
        if (std::hypot(r1, r2) < 1e-12 * (1.0 + scale)) {
            std::vector<NormalPoint> path;
            integrate(v1, v2, &path);
            return path;
        }
        // Finite-difference Jacobian of the endpoint map.
        const double dh = 1e-7 * scale;
        const NormalPoint ha = integrate(v1 + dh, v2, nullptr);
        const NormalPoint hb = integrate(v1, v2 + dh, nullptr);
        const double j11 = (ha.xi1 - hit.xi1) / dh, j21 = (ha.xi2 - hit.xi2) / dh;
        const double j12 = (hb.xi1 - hit.xi1) / dh, j22 = (hb.xi2 - hit.xi2) / dh;
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-30)
            throw GeodesicFailure("shooting Jacobian is singular");
        v1 -= (j22 * r1 - j12 * r2) / det;
        v2 -= (-j21 * r1 + j11 * r2) / det;
    }
    throw GeodesicFailure("geodesic shooting did not converge");
}

} // namespace heatlab
