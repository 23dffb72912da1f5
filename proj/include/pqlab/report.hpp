#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pqlab {

/// Measured sides of one inequality. `implied_constant` is lhs/rhs with the
/// unknown constant removed; the verdict compares it against `budget`.
struct EstimateReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double implied_constant = 0.0;
  double budget = std::numeric_limits<double>::infinity();
  bool pass = false;
  std::map<std::string, double> params;
  std::map<std::string, double> terms;
  std::map<std::string, std::string> provenance;
  std::vector<std::string> notes;

  /// Sets implied_constant = lhs / rhs (0 when both vanish, +inf when only rhs
  /// does) and the verdict.
  void conclude();
  void conclude_with(double implied);
};

/// Least-squares slope of log(value) against log(scale).
struct ExponentFit {
  std::vector<std::pair<double, double>> pairs;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;    // RMS of log residuals
  double half_width = 0.0;  // 95% confidence half-width of the slope
};

}  // namespace pqlab
