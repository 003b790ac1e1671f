#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace specmono {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec2i = Eigen::Vector2i;
using Mat2i = Eigen::Matrix2i;

enum class ErrorKind {
    SingularMatrix,
    OutsideRegularRegion,
    NoOverlap,
    NonIntegerTransition,
    NonUnimodular,
    OpenLoop,
    InvalidParameter,
    EmptySegment,
    LambdaTooLarge,
    RegimeViolation,
    InsufficientPoints,
    DegenerateBasis,
    NoConvergence,
    ResidualTooLarge,
    AlignmentAmbiguity,
    ChainBroken,
    OutsideDomain,
    LeadingTermDegenerate,
    InconsistentSamples,
    CocycleViolation,
    NotALoop,
    MissingEdge,
    ConfigError,
    IoError,
};

const char* kind_name(ErrorKind kind);

/// Every failure of the library surfaces as this exception; `kind` is stable
/// and is what callers (and the CLI exit-code mapping) switch on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

/// Integer inverse of a unimodular matrix; throws NonUnimodular otherwise.
Mat2i inverse_unimodular(const Mat2i& m);

/// Entrywise rounding of a real matrix.
Mat2i round_matrix(const Mat2& m);

double max_abs(const Mat2& m);

}  // namespace specmono
