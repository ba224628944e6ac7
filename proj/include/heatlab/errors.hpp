#pragma once

#include <stdexcept>
#include <string>

namespace heatlab {

struct ChartDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct InvalidCurvatureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GeodesicFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AdmissibilityError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ApproximationFailure : std::runtime_error {
    double best_error;
    ApproximationFailure(const std::string& msg, double best)
        : std::runtime_error(msg), best_error(best) {}
};

struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

struct NumericalError : std::runtime_error {
    double residual;
    NumericalError(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
};

struct ProbeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when the curvature term of the lambda quadratic degenerates, i.e.
// every sectional curvature vanishes and no lambda can make the strict
// convexity condition hold.
struct DegenerateCurvatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstructionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric and closed-form routes disagreeing beyond tolerance points at a
// defect in the differential-geometry plumbing, not at the inputs.
struct GeometryBugError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SearchFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::invalid_argument {
    std::string field;
    UsageError(const std::string& field_path, const std::string& msg)
        : std::invalid_argument(field_path + ": " + msg), field(field_path) {}
};

} // namespace heatlab
