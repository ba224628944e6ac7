#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "heatlab/concavity/admissible.hpp"
#include "heatlab/concavity/audit.hpp"
#include "heatlab/errors.hpp"

namespace heatlab {

struct HotApproximation {
    PointFunction g;        // the hot-concave surrogate
    double a = 0.0;         // hot parameter
    double alpha = 0.0;     // fitted slope against log f
    double beta = 0.0;      // fitted offset
    double sup_error = 0.0; // max |g - f| over the sample set
    AuditReport audit;      // H_a audit of g
};

namespace detail {

inline std::vector<NormalPoint> ball_samples(double radius, int n_radial = 24,
                                             int n_angular = 16) {
    std::vector<NormalPoint> pts;
    pts.push_back({0.0, 0.0});
    for (int i = 1; i <= n_radial; ++i)
        for (int j = 0; j < n_angular; ++j)
            pts.push_back(NormalPoint::polar(
                radius * i / (n_radial + 0.5),
                2 * std::numbers::pi * (j + 0.37 * (i % 3)) / n_angular));
    return pts;
}

} // namespace detail

// Builds a hot-concave surrogate g = a * G(alpha log f + beta) for a bounded
// log-concave f, with (alpha, beta) fitted so H_a(g) tracks H_a-scaled values
// of f. The construction is verified, not assumed: the H_a audit of g must
// pass and the achieved sup error is reported.
inline HotApproximation hot_approximation(const PointFunction& f,
                                          const ModelSurface& surface,
                                          double ball_radius, double a,
                                          const AuditOptions& opts = {},
                                          double fit_margin = 1e-6) {
    if (!(a > 0) || std::isinf(a))
        throw AdmissibilityError("hot approximation needs finite a > 0");
    const AuditReport log_audit =
        audit_domain(f, AdmissibleFunction::power(0.0), surface, ball_radius,
                     opts);
    if (!log_audit.pass)
        throw PreconditionError(
            "hot approximation requires a log-concave input");

    const auto pts = detail::ball_samples(ball_radius);
    double sup_f = 0.0;
    for (const auto& p : pts) sup_f = std::max(sup_f, f(p));
    if (!(sup_f > 0.0))
        throw PreconditionError("hot approximation of the zero function");
    if (sup_f >= a)
        throw AdmissibilityError("input exceeds the hot parameter range");

    // Two-parameter linear least squares of H(f/a) against log f over the
    // region where f is not vanishingly small.
    double s_xx = 0, s_x = 0, s_n = 0, s_xy = 0, s_y = 0;
    for (const auto& p : pts) {
        const double v = f(p);
        if (v < fit_margin * sup_f) continue;
        const double x = std::log(v);
        const double y = detail::hot_inverse(v / a);
        s_xx += x * x;
        s_x += x;
        s_n += 1;
        s_xy += x * y;
        s_y += y;
    }
    const double det = s_xx * s_n - s_x * s_x;
    double alpha, beta;
    if (std::abs(det) < 1e-12 * std::max(1.0, s_xx * s_n)) {
        // Constant f: match the value exactly with unit slope.
        alpha = 1.0;
        beta = detail::hot_inverse(sup_f / a) - std::log(sup_f);
    } else {
        alpha = (s_n * s_xy - s_x * s_y) / det;
        beta = (s_y - alpha * s_x) / s_n;
    }
    if (!(alpha > 0))
        throw ApproximationFailure("fitted slope is not positive", kInf);

    HotApproximation out;
    out.a = a;
    out.alpha = alpha;
    out.beta = beta;
    out.g = [f, a, alpha, beta](const NormalPoint& p) {
        const double v = f(p);
        if (v <= 0.0) return 0.0;
        const double w = detail::hot_forward(alpha * std::log(v) + beta);
        return a * std::min(w, 1.0 - 1e-15); // keep strictly inside [0, a)
    };
    for (const auto& p : pts)
        out.sup_error = std::max(out.sup_error, std::abs(out.g(p) - f(p)));
    out.audit =
        audit_domain(out.g, AdmissibleFunction::hot(a), surface, ball_radius,
                     opts);
    if (!out.audit.pass)
        throw ApproximationFailure("hot audit of the surrogate failed",
                                   out.sup_error);
    return out;
}

struct HotRescaleReport {
    AuditReport precondition; // H_b audit of f_b
    AuditReport rescaled;     // H_a audit of (a/b) f_b
    double slack_gap = 0.0;   // |min_slack difference|
    bool pass = false;
};

// The rescaling identity H_a((a/b) f) = H_b(f): the two audits must agree
// slack-for-slack, so passing H_b-concavity transports to H_a.
inline HotRescaleReport hot_rescale_check(const PointFunction& f_b, double b,
                                          double a,
                                          const ModelSurface& surface,
                                          double ball_radius,
                                          const AuditOptions& opts = {}) {
    if (!(a > 0 && a < b))
        throw AdmissibilityError("rescale check needs 0 < a < b");
    HotRescaleReport out;
    out.precondition =
        audit_domain(f_b, AdmissibleFunction::hot(b), surface, ball_radius,
                     opts);
    if (!out.precondition.pass)
        throw PreconditionError("input is not H_b-concave on the sample set");
    const double eps = a / b;
    PointFunction scaled = [f_b, eps](const NormalPoint& p) {
        return eps * f_b(p);
    };
    out.rescaled = audit_domain(scaled, AdmissibleFunction::hot(a), surface,
                                ball_radius, opts);
    if (std::isfinite(out.precondition.min_slack) &&
        std::isfinite(out.rescaled.min_slack)) {
        out.slack_gap =
            std::abs(out.precondition.min_slack - out.rescaled.min_slack);
    }
    out.pass = out.rescaled.pass &&
               out.slack_gap <=
                   1e-9 * (1.0 + std::abs(out.precondition.min_slack));
    return out;
}

} // namespace heatlab
