#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pqlab {

enum class ErrorKind {
  InvalidArgument,
  DegenerateOrigin,
  QuadratureFailure,
  ResolutionTooCoarse,
  EmptySubdomain,
  RadiusOutsideGrid,
  OutsideGrid,
  InsufficientMargin,
  NotElliptic,
  NonConvexDetected,
  MaxIterations,
  SingularSystem,
  TooFewSamples,
  InvalidTheta,
  ZeroPositivePart,
  DegenerateAbscissa,
  ExponentOutOfRange,
  ConfigInvalid,
  IoFailure,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// experiment manifests can record `error:<kind>` without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace pqlab
