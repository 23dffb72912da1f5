#include "pqlab/error.hpp"

namespace pqlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateOrigin: return "DegenerateOrigin";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::EmptySubdomain: return "EmptySubdomain";
    case ErrorKind::RadiusOutsideGrid: return "RadiusOutsideGrid";
    case ErrorKind::OutsideGrid: return "OutsideGrid";
    case ErrorKind::InsufficientMargin: return "InsufficientMargin";
    case ErrorKind::NotElliptic: return "NotElliptic";
    case ErrorKind::NonConvexDetected: return "NonConvexDetected";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::InvalidTheta: return "InvalidTheta";
    case ErrorKind::ZeroPositivePart: return "ZeroPositivePart";
    case ErrorKind::DegenerateAbscissa: return "DegenerateAbscissa";
    case ErrorKind::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace pqlab
