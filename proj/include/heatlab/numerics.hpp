#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace heatlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace numerics {

// 15-point Gauss-Legendre rule on [-1,1].
struct GaussRule15 {
    static constexpr std::array<double, 15> nodes = {
        -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
        -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
        -0.2011940939974345, 0.0,                 0.2011940939974345,
        0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
        0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
    static constexpr std::array<double, 15> weights = {
        0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
        0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
        0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
        0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
        0.1071592204671719, 0.0703660474881081, 0.0307532419961173};
};

// 7-point rule embedded in the 15-point nodes (odd indices), used as the
// error reference for adaptive refinement.
struct GaussRule7 {
    static constexpr std::array<double, 7> nodes = {
        -0.9491079123427585, -0.7415311855993944, -0.4058451513773972,
        0.0,                 0.4058451513773972,  0.7415311855993944,
        0.9491079123427585};
    static constexpr std::array<double, 7> weights = {
        0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
        0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
        0.1294849661688697};
};

template <class F>
double gauss15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 15; ++i)
        s += GaussRule15::weights[i] * f(c + h * GaussRule15::nodes[i]);
    return h * s;
}

template <class F>
double gauss7(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 7; ++i)
        s += GaussRule7::weights[i] * f(c + h * GaussRule7::nodes[i]);
    return h * s;
}

namespace detail {
template <class F>
double adaptive_rec(F& f, double a, double b, double rel_tol, double abs_tol,
                    int depth) {
    const double coarse = gauss7(f, a, b);
    const double fine = gauss15(f, a, b);
    const double err = std::abs(fine - coarse);
    // The absolute cutoff is essential: in far tails the integrand varies by
    // orders of magnitude across any panel and a purely relative test would
    // recurse to the depth cap everywhere.
    if (err <= rel_tol * std::abs(fine) + abs_tol || depth >= 40) {
        return fine;
    }
    const double m = 0.5 * (a + b);
    return adaptive_rec(f, a, m, rel_tol, 0.5 * abs_tol, depth + 1) +
           adaptive_rec(f, m, b, rel_tol, 0.5 * abs_tol, depth + 1);
}
} // namespace detail

// Adaptive Gauss quadrature on a finite interval. rel_tol applies to panel
// values and, through a first sweep of the whole interval, as an absolute
// threshold against the total scale.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-13,
                 double abs_floor = 1e-300) {
    if (!(a < b)) return 0.0;
    // Split into a few seed panels so a narrow bump inside a long interval
    // cannot be missed by a single coarse estimate.
    const int seeds = 8;
    double scale = 0.0;
    std::array<double, 8> lo, hi;
    for (int k = 0; k < seeds; ++k) {
        lo[k] = a + (b - a) * k / seeds;
        hi[k] = a + (b - a) * (k + 1) / seeds;
        scale += std::abs(gauss15(f, lo[k], hi[k]));
    }
    const double abs_tol = std::max(abs_floor, 0.125 * rel_tol * scale);
    double total = 0.0;
    for (int k = 0; k < seeds; ++k)
        total += detail::adaptive_rec(f, lo[k], hi[k], rel_tol, abs_tol, 0);
    return total;
}

// Bisection refined by Newton once the bracket is tight. g must be strictly
// monotone on [lo, hi] with g(lo), g(hi) straddling the target.
template <class G, class DG>
double invert_monotone(G&& g, DG&& dg, double target, double lo, double hi,
                       double x_tol = 1e-13) {
    double glo = g(lo) - target;
    double ghi = g(hi) - target;
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0) == (ghi > 0))
        throw std::runtime_error("invert_monotone: target not bracketed");
    const bool increasing = ghi > 0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        // Switch to Newton once the bracket is small enough for it to be safe.
        if (hi - lo < 1e-2 * (1.0 + std::abs(mid))) {
            double x = mid;
            for (int n = 0; n < 40; ++n) {
                const double gx = g(x) - target;
                const double d = dg(x);
                if (d == 0.0) break;
                const double step = gx / d;
                const double xn = x - step;
                if (xn < lo || xn > hi) break; // fall back to bisection
                x = xn;
                if (std::abs(step) <= x_tol * (1.0 + std::abs(x))) return x;
            }
        }
        const double gm = g(mid) - target;
        if (gm == 0.0) return mid;
        if ((gm > 0) == increasing)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= x_tol * (1.0 + std::abs(mid))) return 0.5 * (lo + hi);
    }
    return 0.5 * (lo + hi);
}

// Central second difference with Richardson extrapolation over widths h, 2h.
// Returns {extrapolated value, error estimate}.
template <class F>
std::pair<double, double> second_derivative_richardson(F&& f, double x, double h) {
    const double f0 = f(x);
    auto d2 = [&](double w) {
        return (f(x + w) - 2.0 * f0 + f(x - w)) / (w * w);
    };
    const double d_h = d2(h);
    const double d_2h = d2(2.0 * h);
    const double value = (4.0 * d_h - d_2h) / 3.0;
    const double err = std::abs(d_h - d_2h) / 3.0;
    return {value, err};
}

// 4th-order central stencils, used by refinement oracles and the
// Christoffel-Hessian probes.
template <class F>
double second_derivative_o4(F&& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) -
            f(x - 2 * h)) /
           (12 * h * h);
}

template <class F>
double first_derivative_o4(F&& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
           (12 * h);
}

// Halton low-discrepancy sequence.
inline double halton(std::uint64_t index, std::uint32_t base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

// Linear least squares fit y = slope*x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::runtime_error("fit_line: degenerate abscissae");
    LineFit out;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    return out;
}

// Least squares fit y = c0 + c1 x + c2 x^2, by normal equations with the
// abscissae shifted to their mean for conditioning.
struct QuadraticFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

inline QuadraticFit fit_quadratic(const std::vector<double>& x,
                                  const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("fit_quadratic: need at least three points");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = x[i] - mean;
        const double u2 = u * u;
        s0 += 1;
        s1 += u;
        s2 += u2;
        s3 += u2 * u;
        s4 += u2 * u2;
        t0 += y[i];
        t1 += y[i] * u;
        t2 += y[i] * u2;
    }
    // Solve the 3x3 symmetric system by Cramer's rule.
    const double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s2 * s3) +
                       s2 * (s1 * s3 - s2 * s2);
    if (det == 0.0)
        throw std::runtime_error("fit_quadratic: degenerate abscissae");
    const double a0 = (t0 * (s2 * s4 - s3 * s3) - s1 * (t1 * s4 - t2 * s3) +
                       s2 * (t1 * s3 - t2 * s2)) /
                      det;
    const double a1 = (s0 * (t1 * s4 - t2 * s3) - t0 * (s1 * s4 - s2 * s3) +
                       s2 * (s1 * t2 - s2 * t1)) /
                      det;
    const double a2 = (s0 * (s2 * t2 - s3 * t1) - s1 * (s1 * t2 - s3 * t0) +
                       t0 * (s1 * s3 - s2 * s2)) /
                      det;
    QuadraticFit out;
    // Undo the shift: y = a0 + a1 (x-m) + a2 (x-m)^2.
    out.c2 = a2;
    out.c1 = a1 - 2 * a2 * mean;
    out.c0 = a0 - a1 * mean + a2 * mean * mean;
    return out;
}

} // namespace numerics
} // namespace heatlab
