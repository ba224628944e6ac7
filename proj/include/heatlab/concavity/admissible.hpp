#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace detail {

// Time-1 heat evolution of the half-line indicator on R,
//   G(s) = (4 pi)^{-1/2} \int_0^infty exp(-(s-s')^2/4) ds',
// evaluated by adaptive quadrature after the substitution u = (s'-s)/2.
inline double hot_forward(double s) {
    const double lo = -0.5 * s;
    const double hi = std::max(lo, 0.0) + 8.0;
    if (lo >= hi) return 0.0;
    const double integral = numerics::integrate(
        [](double u) { return std::exp(-u * u); }, lo, hi, 1e-14);
    return integral / std::sqrt(std::numbers::pi);
}

inline double hot_forward_derivative(double s) {
    return std::exp(-0.25 * s * s) / (2.0 * std::sqrt(std::numbers::pi));
}

// H = G^{-1} on (0,1), by bracketed bisection refined with Newton.
inline double hot_inverse(double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw AdmissibilityError("hot inverse needs an argument in (0,1)");
    return numerics::invert_monotone(hot_forward, hot_forward_derivative, tau,
                                     -100.0, 100.0, 1e-13);
}

} // namespace detail

// Strictly increasing F on [0,a) with F(0) = -infinity, continuous on (0,a).
// Covers the power family, the hot family, and user monotone tables.
class AdmissibleFunction {
  public:
    enum class Kind { Power, Hot, Custom };

    static AdmissibleFunction power(double alpha) {
        AdmissibleFunction f;
        f.kind_ = Kind::Power;
        f.alpha_ = alpha;
        f.sup_ = kInf;
        return f;
    }

    // Hot function H_a(r) = H(r/a); a = +infinity degenerates to log.
    static AdmissibleFunction hot(double a) {
        if (!(a > 0)) throw AdmissibilityError("hot parameter must be positive");
        AdmissibleFunction f;
        if (std::isinf(a)) {
            f.kind_ = Kind::Power;
            f.alpha_ = 0.0;
            f.sup_ = kInf;
            return f;
        }
        f.kind_ = Kind::Hot;
        f.sup_ = a;
        return f;
    }

    // Monotone sample table (r_i, F(r_i)) on (0, a), linearly interpolated.
    static AdmissibleFunction custom(std::vector<std::pair<double, double>> table,
                                     double a) {
        if (table.size() < 2)
            throw AdmissibilityError("custom table needs at least two rows");
        for (std::size_t i = 0; i + 1 < table.size(); ++i)
            if (!(table[i].first < table[i + 1].first &&
                  table[i].second < table[i + 1].second))
                throw AdmissibilityError("custom table must increase strictly");
        if (!(table.front().first > 0.0) || !(table.back().first < a))
            throw AdmissibilityError("custom table must sample (0, a)");
        AdmissibleFunction f;
        f.kind_ = Kind::Custom;
        f.sup_ = a;
        f.table_ = std::move(table);
        return f;
    }

    Kind kind() const { return kind_; }
    double power_exponent() const { return alpha_; }
    double domain_sup() const { return sup_; }

    bool finite_limit_at_zero() const {
        switch (kind_) {
            case Kind::Power: return alpha_ > 0.0;
            case Kind::Hot: return false;
            case Kind::Custom: return true; // linear extension stays finite
        }
        return false;
    }

    // F(r); the value at r = 0 is the bottom element -infinity.
    double operator()(double r) const {
        if (r < 0.0 || r >= sup_)
            throw AdmissibilityError("argument outside [0, a)");
        if (r == 0.0) return -kInf;
        switch (kind_) {
            case Kind::Power:
                if (alpha_ == 0.0) return std::log(r);
                return (std::pow(r, alpha_) - 1.0) / alpha_;
            case Kind::Hot:
                return detail::hot_inverse(r / sup_);
            case Kind::Custom: {
                return interp_table(r);
            }
        }
        return -kInf;
    }

    // Inverse map; s = -infinity returns 0, values below the essential
    // infimum clamp to 0, values above the supremum raise a range error.
    double inverse(double s) const {
        if (s == -kInf) return 0.0;
        switch (kind_) {
            case Kind::Power: {
                if (alpha_ == 0.0) return std::exp(s);
                if (alpha_ < 0.0) {
                    if (s >= -1.0 / alpha_)
                        throw std::out_of_range(
                            "value above the supremum of the power function");
                    return std::pow(1.0 + alpha_ * s, 1.0 / alpha_);
                }
                if (s <= -1.0 / alpha_) return 0.0;
                return std::pow(1.0 + alpha_ * s, 1.0 / alpha_);
            }
            case Kind::Hot:
                return sup_ * detail::hot_forward(s);
            case Kind::Custom:
                return interp_table_inverse(s);
        }
        return 0.0;
    }

  private:
    double interp_table(double r) const {
        const auto cmp = [](const std::pair<double, double>& row, double x) {
            return row.first < x;
        };
        auto it = std::lower_bound(table_.begin(), table_.end(), r, cmp);
        std::size_t hi = std::min<std::size_t>(
            std::max<std::size_t>(it - table_.begin(), 1), table_.size() - 1);
        const auto& [r0, s0] = table_[hi - 1];
        const auto& [r1, s1] = table_[hi];
        return s0 + (s1 - s0) * (r - r0) / (r1 - r0);
    }

    double interp_table_inverse(double s) const {
        const double slope_back =
            (table_.back().second - table_[table_.size() - 2].second) /
            (table_.back().first - table_[table_.size() - 2].first);
        const double sup_value = table_.back().second +
                                 slope_back * (sup_ - table_.back().first);
        if (s >= sup_value)
            throw std::out_of_range("value above the supremum of the table");
        const auto cmp = [](const std::pair<double, double>& row, double x) {
            return row.second < x;
        };
        auto it = std::lower_bound(table_.begin(), table_.end(), s, cmp);
        std::size_t hi = std::min<std::size_t>(
            std::max<std::size_t>(it - table_.begin(), 1), table_.size() - 1);
        const auto& [r0, s0] = table_[hi - 1];
        const auto& [r1, s1] = table_[hi];
        const double r = r0 + (r1 - r0) * (s - s0) / (s1 - s0);
        return std::max(r, 0.0);
    }

    Kind kind_ = Kind::Power;
    double alpha_ = 0.0;
    double sup_ = kInf;
    std::vector<std::pair<double, double>> table_;
};

inline double eval_F(const AdmissibleFunction& F, double r) { return F(r); }
inline double eval_F_inverse(const AdmissibleFunction& F, double s) {
    return F.inverse(s);
}

} // namespace heatlab
