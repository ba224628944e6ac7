#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "heatlab/concavity/admissible.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/geometry/geodesic.hpp"
#include "heatlab/geometry/model_surface.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

struct AuditOptions {
    double tolerance_scale = 1e-9; // multiplies (1 + |F| scale)
    int n_pairs = 64;
    std::vector<double> taus = {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};
    std::uint64_t seed = 0;
};

struct AuditWitness {
    NormalPoint c0, c1;
    double tau = 0.0;
    double value_c0 = 0.0, value_c1 = 0.0, value_mid = 0.0;
};

// Sampled certificate for the chord inequality: fail is certain, pass is
// evidence at the sampling resolution.
struct AuditReport {
    bool pass = true;
    double min_slack = kInf;
    AuditWitness witness;
    std::size_t samples = 0;
    std::size_t geodesic_failures = 0;
    double tolerance = 0.0;
};

namespace detail {

// Chord slack with the bottom-element conventions: a -infinity endpoint
// satisfies the inequality automatically; a -infinity midpoint against
// finite endpoints violates it outright.
inline double chord_slack(double F_mid, double F_0, double F_1, double tau) {
    if (F_0 == -kInf || F_1 == -kInf) return kInf;
    if (F_mid == -kInf) return -kInf;
    return F_mid - ((1.0 - tau) * F_0 + tau * F_1);
}

struct SlackAccumulator {
    double min_slack = kInf;
    AuditWitness witness;
    double f_scale = 0.0; // running max of finite |F| values
    std::size_t samples = 0;

    void note_scale(double v) {
        if (std::isfinite(v)) f_scale = std::max(f_scale, std::abs(v));
    }
    void offer(double slack, const AuditWitness& w) {
        ++samples;
        if (slack < min_slack) {
            min_slack = slack;
            witness = w;
        }
    }
};

inline AuditReport finish(const SlackAccumulator& acc, double tol_scale,
                          std::size_t failures) {
    AuditReport rep;
    rep.min_slack = acc.min_slack;
    rep.witness = acc.witness;
    rep.samples = acc.samples;
    rep.geodesic_failures = failures;
    rep.tolerance = tol_scale * (1.0 + acc.f_scale);
    rep.pass = !(rep.min_slack < -rep.tolerance);
    return rep;
}

} // namespace detail

using PointFunction = std::function<double(const NormalPoint&)>;

namespace detail {

inline double checked_value(const PointFunction& f, const NormalPoint& p,
                            double sup) {
    const double v = f(p);
    if (!(v >= 0.0) || v >= sup)
        throw AdmissibilityError(
            "audited function leaves [0, a) at a sample point");
    return v;
}

inline void audit_one_geodesic(const PointFunction& f,
                               const AdmissibleFunction& F, const Geodesic& c,
                               const std::vector<double>& taus,
                               SlackAccumulator& acc) {
    const double sup = F.domain_sup();
    const double f0 = checked_value(f, c.start(), sup);
    const double f1 = checked_value(f, c.end(), sup);
    const double F0 = F(f0);
    const double F1 = F(f1);
    acc.note_scale(F0);
    acc.note_scale(F1);
    for (double tau : taus) {
        const NormalPoint mid = c.point_at(tau);
        const double fm = checked_value(f, mid, sup);
        const double Fm = F(fm);
        acc.note_scale(Fm);
        AuditWitness w{c.start(), c.end(), tau, f0, f1, fm};
        acc.offer(chord_slack(Fm, F0, F1, tau), w);
    }
}

// Deterministic endpoint pairs: axis and diagonal diameters first, then
// Halton points in the disk, offset by the seed.
inline std::vector<std::pair<NormalPoint, NormalPoint>> endpoint_pairs(
    double radius, const AuditOptions& opts) {
    std::vector<std::pair<NormalPoint, NormalPoint>> pairs;
    const double r = 0.9 * radius;
    const double d = r / std::numbers::sqrt2;
    pairs.push_back({{-r, 0}, {r, 0}});
    pairs.push_back({{0, -r}, {0, r}});
    pairs.push_back({{-d, -d}, {d, d}});
    pairs.push_back({{-d, d}, {d, -d}});
    const std::uint64_t offset = 1 + opts.seed * 7919;
    for (int i = 0; int(pairs.size()) < opts.n_pairs; ++i) {
        const std::uint64_t k = offset + i;
        auto disk_point = [&](std::uint32_t b1, std::uint32_t b2) {
            const double u = numerics::halton(k, b1);
            const double v = numerics::halton(k, b2);
            return NormalPoint::polar(radius * std::sqrt(u),
                                      2 * std::numbers::pi * v);
        };
        pairs.push_back({disk_point(2, 3), disk_point(5, 7)});
    }
    return pairs;
}

} // namespace detail

// Chord audit along one sampled geodesic.
inline AuditReport audit_along(const PointFunction& f,
                               const AdmissibleFunction& F, const Geodesic& c,
                               const std::vector<double>& taus,
                               double tolerance_scale = 1e-9) {
    detail::SlackAccumulator acc;
    detail::audit_one_geodesic(f, F, c, taus, acc);
    return detail::finish(acc, tolerance_scale, 0);
}

// Chord audit over a geodesic ball: structured sweep plus low-discrepancy
// endpoint pairs, worst witness kept.
inline AuditReport audit_domain(const PointFunction& f,
                                const AdmissibleFunction& F,
                                const ModelSurface& surface, double ball_radius,
                                const AuditOptions& opts = {}) {
    if (!(ball_radius > 0) || ball_radius > surface.convexity_radius())
        throw ChartDomainError("audit ball outside the convexity guard");
    detail::SlackAccumulator acc;
    std::size_t failures = 0;
    for (const auto& [p, q] : detail::endpoint_pairs(ball_radius, opts)) {
        try {
            const Geodesic c = geodesic(surface, p, q);
            detail::audit_one_geodesic(f, F, c, opts.taus, acc);
        } catch (const GeodesicFailure&) {
            ++failures;
        }
    }
    return detail::finish(acc, opts.tolerance_scale, failures);
}

enum class ExtremeMode { Quasi, Infinity };

// The two extreme concavities; endpoints are restricted to f > 0.
inline AuditReport audit_extremes(const PointFunction& f, ExtremeMode mode,
                                  const ModelSurface& surface,
                                  double ball_radius,
                                  const AuditOptions& opts = {}) {
    if (!(ball_radius > 0) || ball_radius > surface.convexity_radius())
        throw ChartDomainError("audit ball outside the convexity guard");
    detail::SlackAccumulator acc;
    std::size_t failures = 0;
    for (const auto& [p, q] : detail::endpoint_pairs(ball_radius, opts)) {
        try {
            const Geodesic c = geodesic(surface, p, q);
            const double f0 = f(p), f1 = f(q);
            if (!(f0 > 0.0) || !(f1 > 0.0)) continue;
            acc.note_scale(f0);
            acc.note_scale(f1);
            const double bar = mode == ExtremeMode::Quasi ? std::min(f0, f1)
                                                          : std::max(f0, f1);
            for (double tau : opts.taus) {
                const double fm = f(c.point_at(tau));
                acc.note_scale(fm);
                AuditWitness w{p, q, tau, f0, f1, fm};
                acc.offer(fm - bar, w);
            }
        } catch (const GeodesicFailure&) {
            ++failures;
        }
    }
    return detail::finish(acc, opts.tolerance_scale, failures);
}

// Re-derives the witness slack from its stored coordinates.
inline double reevaluate_witness(const PointFunction& f,
                                 const AdmissibleFunction& F,
                                 const ModelSurface& surface,
                                 const AuditWitness& w) {
    const Geodesic c = geodesic(surface, w.c0, w.c1);
    const double F0 = F(f(w.c0));
    const double F1 = F(f(w.c1));
    const double Fm = F(f(c.point_at(w.tau)));
    return detail::chord_slack(Fm, F0, F1, w.tau);
}

} // namespace heatlab
