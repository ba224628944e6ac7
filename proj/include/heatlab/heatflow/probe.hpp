#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "heatlab/errors.hpp"
#include "heatlab/heatflow/polar_grid.hpp"
#include "heatlab/heatflow/solver.hpp"

namespace heatlab {

namespace detail {

struct CubicWeights {
    double w[4];
};

// Lagrange cubic on the uniform stencil {-1, 0, 1, 2} at parameter t.
inline CubicWeights cubic_weights(double t) {
    CubicWeights cw;
    cw.w[0] = -t * (t - 1) * (t - 2) / 6.0;
    cw.w[1] = (t + 1) * (t - 1) * (t - 2) / 2.0;
    cw.w[2] = -(t + 1) * t * (t - 2) / 2.0;
    cw.w[3] = (t + 1) * t * (t - 1) / 6.0;
    return cw;
}

// Ring value at a continuous angle; negative ring indices reflect through
// the pole (rho -> -rho is theta -> theta + pi), index 0 is the pole node.
inline double ring_value(const ScalarGridField& f, int ring, double theta) {
    const auto& g = f.grid;
    if (ring == 0) return f.values[0];
    if (ring < 0) {
        ring = -ring;
        theta += std::numbers::pi;
    }
    const double jr = theta / g.h_theta();
    const int jf = static_cast<int>(std::floor(jr));
    const auto cw = cubic_weights(jr - jf);
    double v = 0.0;
    for (int k = 0; k < 4; ++k)
        v += cw.w[k] * f.values[g.node_index(ring, jf - 1 + k)];
    return v;
}

} // namespace detail

// Bicubic interpolation in (rho, theta) with exact pole symmetry.
inline double interpolate(const ScalarGridField& f, double rho, double theta) {
    const auto& g = f.grid;
    if (!(rho <= g.R + 1e-12 * g.R))
        throw ProbeError("interpolation point outside the grid");
    const double ir = rho / g.h_rho();
    int base = static_cast<int>(std::floor(ir));
    base = std::min(base, g.n_rho - 2); // keep the stencil on the grid
    const auto cw = detail::cubic_weights(ir - base);
    double v = 0.0;
    for (int k = 0; k < 4; ++k)
        v += cw.w[k] * detail::ring_value(f, base - 1 + k, theta);
    return v;
}

inline double interpolate_xi(const ScalarGridField& f, const NormalPoint& p) {
    return interpolate(f, p.rho(), p.angle());
}

struct ProbeResult {
    double value = 0.0;
    double error = 0.0; // Richardson spread, an error estimate
};

// Second differences of log of a positive line profile at widths h, 2h, 4h,
// kept separate so probes from different routes can be combined linearly
// before extrapolation. Two Richardson levels remove the h^2 and h^4 terms;
// the spread of the two first-level extrapolants is the error estimate,
// which avoids charging the estimate for truncation that the extrapolation
// itself eliminates.
struct RawSecondDiff {
    double d_h = 0.0;
    double d_2h = 0.0;
    double d_4h = 0.0;

    RawSecondDiff& operator+=(const RawSecondDiff& o) {
        d_h += o.d_h;
        d_2h += o.d_2h;
        d_4h += o.d_4h;
        return *this;
    }
    RawSecondDiff& operator-=(const RawSecondDiff& o) {
        d_h -= o.d_h;
        d_2h -= o.d_2h;
        d_4h -= o.d_4h;
        return *this;
    }
    ProbeResult richardson() const {
        const double r1 = (4.0 * d_h - d_2h) / 3.0;
        const double r2 = (4.0 * d_2h - d_4h) / 3.0;
        ProbeResult out;
        out.value = (16.0 * r1 - r2) / 15.0;
        out.error = std::abs(r1 - r2) / 15.0;
        return out;
    }
};

// line(x) must be the positive profile along a geodesic line through the
// base point, x the signed arclength.
inline RawSecondDiff raw_log_second_diff(
    const std::function<double(double)>& line, double h) {
    auto log_at = [&](double x) {
        const double u = line(x);
        if (!(u > 0.0))
            throw ProbeError("nonpositive value under the probe stencil");
        return std::log(u);
    };
    const double l0 = log_at(0.0);
    auto second = [&](double w) {
        return (log_at(w) - 2 * l0 + log_at(-w)) / (w * w);
    };
    RawSecondDiff out;
    out.d_h = second(h);
    out.d_2h = second(2 * h);
    out.d_4h = second(4 * h);
    return out;
}

inline RawSecondDiff raw_log_second_diff(const ScalarGridField& field,
                                         double direction_angle, double h) {
    return raw_log_second_diff(
        [&](double x) {
            const double rho = std::abs(x);
            const double th = x >= 0 ? direction_angle
                                     : direction_angle + std::numbers::pi;
            return interpolate(field, rho, th);
        },
        h);
}

// Central second difference of log u along the line through the pole in the
// given direction, Richardson-extrapolated over widths h and 2h. At the base
// point the Christoffel symbols vanish, so no connection correction enters.
inline ProbeResult probe_hessian_log(const ScalarGridField& field,
                                     double direction_angle, double h) {
    const auto& g = field.grid;
    if (!(h >= 3.0 * g.h_rho()))
        throw ProbeError("probe width under three cells");
    if (!(2.0 * h <= 0.9 * g.R))
        throw ProbeError("probe stencil too close to the boundary ring");

    auto log_u = [&](double x) {
        const double rho = std::abs(x);
        const double th =
            x >= 0 ? direction_angle : direction_angle + std::numbers::pi;
        const double u = interpolate(field, rho, th);
        if (!(u > 0.0))
            throw ProbeError("nonpositive value under the probe stencil");
        return std::log(u);
    };

    const double l0 = log_u(0.0);
    auto second = [&](double w) {
        return (log_u(w) - 2.0 * l0 + log_u(-w)) / (w * w);
    };
    const double d_h = second(h);
    const double d_2h = second(2.0 * h);
    ProbeResult out;
    out.value = (4.0 * d_h - d_2h) / 3.0;
    out.error = std::abs(d_h - d_2h) / 3.0;
    return out;
}

inline ProbeResult probe_hessian_log(const HeatSolution& sol, double t,
                                     double direction_angle, double h) {
    return probe_hessian_log(sol.at_time(t), direction_angle, h);
}

} // namespace heatlab
