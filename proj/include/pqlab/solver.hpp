#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pqlab/grid.hpp"
#include "pqlab/integrand.hpp"

namespace pqlab {

/// Minimize Σ_T |T|·F(∇u|_T) over P1 fields with the boundary values of
/// `boundary_data`. Interior values of `boundary_data` are ignored.
struct DirichletProblem {
  ScalarField boundary_data;
  Integrand integrand;
};

/// −∇·(a∇u) = 0 with Dirichlet data; a is averaged over each triangle.
struct LinearDirichletProblem {
  ScalarField boundary_data;
  CoefficientField coefficients;
};

struct SolverOptions {
  int max_iterations = 100;
  double armijo = 1e-4;
  int max_halvings = 60;
  double decrement_tolerance = 1e-10;  // relative to 1 + |energy|
  double residual_tolerance = 1e-8;
};

struct SolveReport {
  int iterations = 0;
  double final_energy = 0.0;
  double residual = 0.0;  // weak residual; relative to the term size for linear solves
  std::vector<double> decrements;  // λ²/2 per Newton step
  std::vector<double> energies;    // energy before each step, then the final one
  double wall_time = 0.0;          // seconds
  bool converged = false;
  /// max(0, max_int − max_bdry, min_bdry − min_int); linear solves only.
  double max_principle_violation = 0.0;
};

double discrete_energy(const ScalarField& u, const Integrand& F);

/// Damped Newton descent from the harmonic extension (or `initial`, whose
/// boundary values are replaced). Throws NonConvexDetected when the Hessian
/// has a nonpositive pivot and MaxIterations when the tolerances are not met.
std::pair<ScalarField, SolveReport> minimize(const DirichletProblem& problem,
                                             const SolverOptions& options = {},
                                             const std::optional<ScalarField>& initial = {});

/// Throws SingularSystem when the factorization fails.
std::pair<ScalarField, SolveReport> solve_linear(const LinearDirichletProblem& problem,
                                                 const SolverOptions& options = {});

/// Discrete harmonic function with the boundary values of `boundary_data`.
ScalarField harmonic_extension(const ScalarField& boundary_data);

/// max over interior nodes i of |Σ_T |T| ∂F(∇u|_T)·∇φ_i|.
double el_residual(const ScalarField& u, const Integrand& F);

/// max over nodes away from the boundary of the weak residual of
/// ∇·(A ∇w) with A = ∂²F(∇u) frozen per triangle and w the nodal average of
/// ∂_s u (s = 0 or 1).
double differentiated_el_check(const ScalarField& u, const Integrand& F, int s);

/// Per-node ∂²F at the nodal-averaged gradient, validated against [nu, lambda_up].
CoefficientField frozen_coefficients(const ScalarField& u, const Integrand& F, double nu,
                                     double lambda_up, double tolerance = 1e-9);

}  // namespace pqlab
