#include "specmono/types.hpp"

#include <cmath>

namespace specmono {

const char* kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::OutsideRegularRegion: return "OutsideRegularRegion";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::NonIntegerTransition: return "NonIntegerTransition";
    case ErrorKind::NonUnimodular: return "NonUnimodular";
    case ErrorKind::OpenLoop: return "OpenLoop";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::EmptySegment: return "EmptySegment";
    case ErrorKind::LambdaTooLarge: return "LambdaTooLarge";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::AlignmentAmbiguity: return "AlignmentAmbiguity";
    case ErrorKind::ChainBroken: return "ChainBroken";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::LeadingTermDegenerate: return "LeadingTermDegenerate";
    case ErrorKind::InconsistentSamples: return "InconsistentSamples";
    case ErrorKind::CocycleViolation: return "CocycleViolation";
    case ErrorKind::NotALoop: return "NotALoop";
    case ErrorKind::MissingEdge: return "MissingEdge";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind), detail_(what) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

Mat2i inverse_unimodular(const Mat2i& m) {
    const int det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (det != 1 && det != -1)
        fail(ErrorKind::NonUnimodular, "determinant " + std::to_string(det));
    Mat2i inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv * det;
}

Mat2i round_matrix(const Mat2& m) {
    Mat2i r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = static_cast<int>(std::lround(m(i, j)));
    return r;
}

double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace specmono
