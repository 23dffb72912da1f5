#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqlab/boundary.hpp"
#include "pqlab/grid.hpp"
#include "pqlab/solver.hpp"

namespace pqlab {

/// One experiment read from an INI file. Sections and keys:
///
///   [experiment]     name, kind, seed, workers
///   [integrand]      p, q, mu, nu, nu_tilde
///   [domain]         shape (disc|square), center, radius | corner, side
///   [resolution]     n (list)
///   [regularization] eps, delta (strictly decreasing lists)
///   [boundary]       family, amplitude, xi, lambda, center, width, modes, offset
///   [sweep]          q, amplitude, lambda (lists), trials, rho, sigma
///   [tolerances]     residual, decrement, max_iterations, slope_min, slope_max, budget
///   [output]         directory
///
/// Lists are comma separated. Empty sweep axes fall back to the base value.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string kind;
  std::uint64_t seed = 1;
  int workers = 1;

  double p = 2.0;
  double q = 4.0;
  double mu = 1.0;
  double nu = 1.0;
  double nu_tilde = 1.0;

  Domain domain = Domain::unit_disc();
  std::vector<int> resolutions{64};
  std::vector<double> eps_schedule;
  std::vector<double> delta_schedule;
  BoundarySpec boundary;

  std::vector<double> q_values;
  std::vector<double> amplitudes;
  std::vector<double> lambdas;
  int trials = 1;
  double rho = 0.25;
  double sigma = 0.5;

  SolverOptions solver;
  double slope_min = 0.23;
  double slope_max = 0.27;
  std::optional<double> budget;

  std::string output_dir = "results";

  /// Raw section/key/value triples in file order, for the manifest.
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> echo;
  std::string source;
  /// Field-level problems found while reading (bad numbers, unknown keys).
  std::vector<std::pair<std::string, std::string>> parse_problems;

  std::vector<double> q_axis() const { return q_values.empty() ? std::vector{q} : q_values; }
  std::vector<double> amplitude_axis() const {
    return amplitudes.empty() ? std::vector{boundary.amplitude} : amplitudes;
  }
  std::vector<double> lambda_axis() const {
    return lambdas.empty() ? std::vector{boundary.lambda} : lambdas;
  }
};

const std::vector<std::string>& experiment_kinds();

/// ε_k = δ_k = 0.1·2^{−k}, k = 0..4.
std::vector<double> default_schedule();

/// Throws ConfigInvalid on INI syntax errors and IoFailure when unreadable.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<stream>");
ExperimentConfig load_config(const std::string& path);

struct Diagnostic {
  std::string field;
  std::string message;
};

/// Every problem of the config; empty when it can be run.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

}  // namespace pqlab
