#include "pqlab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pqlab/error.hpp"

namespace pqlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using LocalGrad = Eigen::Matrix<double, 2, 3>;

// ∇u|_T = G_T · (u at triangle_nodes(T)); lower (n00,n10,n11), upper (n00,n11,n01).
struct TriangleOps {
  LocalGrad lower, upper;
  double area;

  explicit TriangleOps(const Grid& g) : area(g.triangle_area()) {
    const double h = g.spacing();
    lower << -1, 1, 0, 0, -1, 1;
    upper << 0, 1, -1, -1, 0, 1;
    lower /= h;
    upper /= h;
  }
  const LocalGrad& of(Index t) const { return t % 2 == 0 ? lower : upper; }
};

// Interior nodes are the unknowns; boundary nodes map to -1.
struct DofMap {
  std::vector<Index> index;
  Index size = 0;

  explicit DofMap(const Grid& g) : index(std::size_t(g.num_nodes()), -1) {
    for (Index i : g.interior_nodes()) index[std::size_t(i)] = size++;
  }
};

Eigen::Vector3d local_values(const Grid& g, Index t, const Eigen::VectorXd& u) {
  const auto n = g.triangle_nodes(t);
  return {u(n[0]), u(n[1]), u(n[2])};
}

double energy_of(const Grid& g, const TriangleOps& ops, const Eigen::VectorXd& u,
                 const Integrand& F) {
  double sum = 0.0;
  for (Index t = 0; t < g.num_triangles(); ++t) {
    sum += F.value(ops.of(t) * local_values(g, t, u));
  }
  return ops.area * sum;
}

// Gradient (and optionally Hessian) of the discrete energy in the interior unknowns.
void assemble(const Grid& g, const TriangleOps& ops, const DofMap& dofs, const Eigen::VectorXd& u,
              const Integrand& F, Eigen::VectorXd& grad, SpMat* hess) {
  grad.setZero(dofs.size);
  std::vector<Eigen::Triplet<double>> triplets;
  if (hess) triplets.reserve(std::size_t(9 * g.num_triangles()));
  for (Index t = 0; t < g.num_triangles(); ++t) {
    const LocalGrad& G = ops.of(t);
    const auto n = g.triangle_nodes(t);
    const Evaluation e = F.evaluate(G * local_values(g, t, u));
    const Eigen::Vector3d local_grad = ops.area * G.transpose() * e.gradient;
    Eigen::Matrix3d local_hess;
    if (hess) local_hess = ops.area * G.transpose() * e.hessian * G;
    for (int a = 0; a < 3; ++a) {
      const Index ra = dofs.index[std::size_t(n[a])];
      if (ra < 0) continue;
      grad(ra) += local_grad(a);
      if (!hess) continue;
      for (int b = 0; b < 3; ++b) {
        const Index cb = dofs.index[std::size_t(n[b])];
        if (cb >= 0) triplets.emplace_back(ra, cb, local_hess(a, b));
      }
    }
  }
  if (hess) {
    hess->resize(dofs.size, dofs.size);
    hess->setFromTriplets(triplets.begin(), triplets.end());
  }
}

Eigen::VectorXd with_boundary(const Grid& g, Eigen::VectorXd u, const Eigen::VectorXd& data) {
  for (Index i : g.boundary_nodes()) u(i) = data(i);
  return u;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double discrete_energy(const ScalarField& u, const Integrand& F) {
  const TriangleOps ops(u.grid());
  return energy_of(u.grid(), ops, u.values(), F);
}

std::pair<ScalarField, SolveReport> minimize(const DirichletProblem& problem,
                                             const SolverOptions& options,
                                             const std::optional<ScalarField>& initial) {
  const auto start = std::chrono::steady_clock::now();
  const Integrand& F = problem.integrand;
  const GrowthParams& params = F.params();
  if (params.mu == 0.0 && params.p < 2.0) {
    fail(ErrorKind::DegenerateOrigin, "minimize needs mu > 0 when p < 2");
  }
  require(params.nu_tilde > 0.0, ErrorKind::InvalidArgument,
          "minimize needs an integrand with lower q-ellipticity (nu_tilde > 0)");

  const ScalarField& data = problem.boundary_data;
  const Grid& g = data.grid();
  if (initial) {
    require(initial->grid_ptr() == data.grid_ptr(), ErrorKind::InvalidArgument,
            "initial guess must live on the boundary data grid");
  }
  const TriangleOps ops(g);
  const DofMap dofs(g);
  Eigen::VectorXd u = with_boundary(
      g, initial ? initial->values() : harmonic_extension(data).values(), data.values());

  SolveReport report;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::VectorXd grad;
  SpMat hess;
  double energy = energy_of(g, ops, u, F);
  bool pattern_ready = false;

  for (int it = 0; it <= options.max_iterations; ++it) {
    assemble(g, ops, dofs, u, F, grad, &hess);
    report.residual = dofs.size > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
    report.energies.push_back(energy);
    if (dofs.size == 0) {
      report.converged = true;
      break;
    }
    if (!pattern_ready) {
      ldlt.analyzePattern(hess);
      pattern_ready = true;
    }
    ldlt.factorize(hess);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
      fail(ErrorKind::NonConvexDetected, "energy Hessian has a nonpositive pivot at iteration " +
                                             std::to_string(it));
    }
    const Eigen::VectorXd dof_step = ldlt.solve(-grad);
    const double slope = grad.dot(dof_step);
    Eigen::VectorXd step = Eigen::VectorXd::Zero(u.size());
    for (Index i : g.interior_nodes()) step(i) = dof_step(dofs.index[std::size_t(i)]);
    const double decrement = -0.5 * slope;
    report.decrements.push_back(decrement);
    const double threshold = options.decrement_tolerance * (1.0 + std::abs(energy));
    if (decrement <= threshold && report.residual <= options.residual_tolerance) {
      report.converged = true;
      break;
    }
    if (it == options.max_iterations) break;

    Eigen::VectorXd trial = u + step;
    double trial_energy = energy_of(g, ops, trial, F);
    // Below the decrement tolerance energy differences are rounding noise:
    // take the full step to clean up the residual.
    if (decrement > threshold) {
      double t = 1.0;
      int halvings = 0;
      while (trial_energy > energy + options.armijo * t * slope) {
        if (++halvings > options.max_halvings) {
          fail(ErrorKind::MaxIterations, "line search stalled at iteration " + std::to_string(it));
        }
        t *= 0.5;
        trial = u + t * step;
        trial_energy = energy_of(g, ops, trial, F);
      }
    }
    u = std::move(trial);
    energy = trial_energy;
    ++report.iterations;
  }

  report.final_energy = energy;
  report.wall_time = seconds_since(start);
  if (!report.converged) {
    fail(ErrorKind::MaxIterations,
         "Newton did not converge in " + std::to_string(options.max_iterations) +
             " iterations (residual " + std::to_string(report.residual) + ")");
  }
  return {ScalarField(data.grid_ptr(), std::move(u)), std::move(report)};
}

std::pair<ScalarField, SolveReport> solve_linear(const LinearDirichletProblem& problem,
                                                 const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const ScalarField& data = problem.boundary_data;
  const CoefficientField& a = problem.coefficients;
  require(a.grid_ptr() == data.grid_ptr(), ErrorKind::InvalidArgument,
          "coefficients and boundary data must share a grid");
  const Grid& g = data.grid();
  const TriangleOps ops(g);
  const DofMap dofs(g);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(std::size_t(9 * g.num_triangles()));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.size);
  for (Index t = 0; t < g.num_triangles(); ++t) {
    const auto n = g.triangle_nodes(t);
    const Mat2 at = (a.at(n[0]) + a.at(n[1]) + a.at(n[2])) / 3.0;
    const LocalGrad& G = ops.of(t);
    const Eigen::Matrix3d k = ops.area * G.transpose() * at * G;
    for (int r = 0; r < 3; ++r) {
      const Index row = dofs.index[std::size_t(n[r])];
      if (row < 0) continue;
      for (int c = 0; c < 3; ++c) {
        const Index col = dofs.index[std::size_t(n[c])];
        if (col >= 0) {
          triplets.emplace_back(row, col, k(r, c));
        } else {
          rhs(row) -= k(r, c) * data(n[c]);
        }
      }
    }
  }
  SpMat K(dofs.size, dofs.size);
  K.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd u = data.values();
  SolveReport report;
  if (dofs.size > 0) {
    Eigen::SimplicialLDLT<SpMat> ldlt(K);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
      fail(ErrorKind::SingularSystem, "stiffness matrix is not positive definite");
    }
    Eigen::VectorXd x = ldlt.solve(rhs);
    x += ldlt.solve(rhs - K * x);  // one step of iterative refinement
    // Scaled by the size of the terms so that high-contrast systems are comparable.
    const double scale = std::max({1.0, rhs.cwiseAbs().maxCoeff(),
                                   (K.cwiseAbs() * x.cwiseAbs()).maxCoeff()});
    report.residual = (K * x - rhs).cwiseAbs().maxCoeff() / scale;
    for (Index i : g.interior_nodes()) u(i) = x(dofs.index[std::size_t(i)]);
    report.iterations = 1;
  }
  report.converged = report.residual <= options.residual_tolerance;

  double bmax = -std::numeric_limits<double>::infinity(), bmin = -bmax;
  for (Index i : g.boundary_nodes()) {
    bmax = std::max(bmax, u(i));
    bmin = std::min(bmin, u(i));
  }
  double violation = 0.0;
  for (Index i : g.interior_nodes()) {
    violation = std::max({violation, u(i) - bmax, bmin - u(i)});
  }
  report.max_principle_violation = violation;
  for (Index t = 0; t < g.num_triangles(); ++t) {
    const auto n = g.triangle_nodes(t);
    const Mat2 at = (a.at(n[0]) + a.at(n[1]) + a.at(n[2])) / 3.0;
    const Vec2 grad = ops.of(t) * local_values(g, t, u);
    report.final_energy += 0.5 * ops.area * grad.dot(at * grad);
  }
  report.wall_time = seconds_since(start);
  return {ScalarField(data.grid_ptr(), std::move(u)), std::move(report)};
}

ScalarField harmonic_extension(const ScalarField& boundary_data) {
  const auto a = CoefficientField::constant(boundary_data.grid_ptr(), Mat2::Identity(), 1.0, 1.0);
  return solve_linear({boundary_data, a}).first;
}

double el_residual(const ScalarField& u, const Integrand& F) {
  const Grid& g = u.grid();
  const TriangleOps ops(g);
  const DofMap dofs(g);
  Eigen::VectorXd grad;
  assemble(g, ops, dofs, u.values(), F, grad, nullptr);
  return dofs.size > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
}

double differentiated_el_check(const ScalarField& u, const Integrand& F, int s) {
  require(s == 0 || s == 1, ErrorKind::InvalidArgument, "direction index must be 0 or 1");
  const Grid& g = u.grid();
  const TriangleOps ops(g);
  const Eigen::VectorXd w = nodal_gradient(u).col(s);

  // Nodes whose whole star consists of interior nodes.
  std::vector<char> deep(std::size_t(g.num_nodes()), 0);
  for (Index i : g.interior_nodes()) {
    bool ok = true;
    for (Index t : g.node_triangles()[std::size_t(i)]) {
      for (Index v : g.triangle_nodes(t)) ok = ok && !g.is_boundary(v);
    }
    deep[std::size_t(i)] = ok;
  }

  Eigen::VectorXd residual = Eigen::VectorXd::Zero(g.num_nodes());
  for (Index t = 0; t < g.num_triangles(); ++t) {
    const LocalGrad& G = ops.of(t);
    const auto n = g.triangle_nodes(t);
    const Mat2 A = F.evaluate(G * local_values(g, t, u.values())).hessian;
    const Eigen::Vector3d r = ops.area * G.transpose() * (A * (G * local_values(g, t, w)));
    for (int k = 0; k < 3; ++k) residual(n[k]) += r(k);
  }
  double worst = 0.0;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    if (deep[std::size_t(i)]) worst = std::max(worst, std::abs(residual(i)));
  }
  return worst;
}

CoefficientField frozen_coefficients(const ScalarField& u, const Integrand& F, double nu,
                                     double lambda_up, double tolerance) {
  const Points2 grads = nodal_gradient(u);
  std::vector<Mat2> matrices(std::size_t(grads.rows()));
  for (Index i = 0; i < grads.rows(); ++i) {
    const Mat2 hess = F.evaluate(grads.row(i).transpose()).hessian;
    matrices[std::size_t(i)] = 0.5 * (hess + hess.transpose());
  }
  return CoefficientField(u.grid_ptr(), std::move(matrices), nu, lambda_up, tolerance);
}

}  // namespace pqlab
