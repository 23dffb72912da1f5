#include "pqlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "pqlab/error.hpp"
#include "pqlab/solver.hpp"

namespace pqlab {

void EstimateReport::conclude() {
  double implied;
  if (rhs > 0.0) {
    implied = lhs / rhs;
  } else {
    implied = lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  conclude_with(implied);
}

void EstimateReport::conclude_with(double implied) {
  implied_constant = implied;
  pass = std::isfinite(implied) && implied <= budget;
}

namespace {

void require_ball_inside(const Grid& g, const Ball& ball) {
  require(ball.radius > 0.0, ErrorKind::InvalidArgument, "ball radius must be positive");
  const double reach = (ball.center - g.center()).norm() + ball.radius;
  if (reach > g.radius() * (1.0 + 1e-12)) {
    fail(ErrorKind::RadiusOutsideGrid, "ball is not contained in the grid");
  }
}

void echo_ball(EstimateReport& r, const Ball& ball) {
  r.params["ball_x1"] = ball.center.x();
  r.params["ball_x2"] = ball.center.y();
  r.params["ball_radius"] = ball.radius;
}

}  // namespace

EstimateReport check_interpolation_1d(const Eigen::VectorXd& samples, double h,
                                      double allowance) {
  require(samples.size() >= 8, ErrorKind::TooFewSamples, "interpolation check needs >= 8 samples");
  require(h > 0.0, ErrorKind::InvalidArgument, "sample spacing must be positive");
  const Index n = samples.size();
  const double length = h * double(n - 1);
  const auto a = samples.head(n - 1).array();
  const auto b = samples.tail(n - 1).array();
  // Offsetting by the first sample keeps constant data exact.
  const double base = samples(0);
  const double mean = base + 0.5 * h * ((a - base) + (b - base)).sum() / length;
  const auto wa = a - mean;
  const auto wb = b - mean;

  EstimateReport r;
  r.name = "interpolation_1d";
  r.lhs = (samples.array() - mean).abs().maxCoeff();
  const double l2 = std::sqrt(h / 3.0 * (wa * wa + wa * wb + wb * wb).sum());
  const double dl2 = std::sqrt(((b - a).square()).sum() / h);
  r.rhs = std::sqrt(2.0) * std::sqrt(l2) * std::sqrt(dl2);
  r.terms["mean"] = mean;
  r.terms["l2_deviation"] = l2;
  r.terms["l2_derivative"] = dl2;
  r.params["h"] = h;
  r.params["samples"] = double(n);
  r.params["allowance"] = allowance;
  r.provenance["samples"] = "piecewise-linear interpolant, exact norms";
  r.budget = 1.0;
  r.conclude();
  r.pass = r.lhs <= r.rhs + allowance;
  return r;
}

EstimateReport check_slice_pick(const ScalarField& u, double rho, double sigma, double budget) {
  require(rho > 0.0 && rho < sigma, ErrorKind::InvalidArgument, "slice pick needs 0 < rho < sigma");
  const Grid& g = u.grid();
  const Region annulus = Region::annulus(g.center(), rho, sigma);
  const CircleMinimum slice = min_circle_sup(u, rho, sigma, 64);
  const double l2 = lp_norm(u, 2.0, annulus);
  const double grad_l2 = gradient_lp_norm(u, 2.0, annulus);

  EstimateReport r;
  r.name = "slice_pick";
  r.budget = budget;
  r.lhs = slice.value;
  r.rhs = (l2 + std::sqrt(l2 * grad_l2)) / std::sqrt(sigma - rho);
  r.params["rho"] = rho;
  r.params["sigma"] = sigma;
  r.params["h"] = g.spacing();
  r.terms["r_star"] = slice.radius;
  r.terms["l2_annulus"] = l2;
  r.terms["grad_l2_annulus"] = grad_l2;
  r.provenance["annulus"] = "cell sub-samples with center in the annulus (4x4 per cell)";
  r.provenance["slice"] = "64 radii, max(64, 2 pi r/h) angles, linear interpolation";
  r.conclude();
  return r;
}

HoleFilling hole_filling(double theta, double alpha, double A, double B,
                         const std::function<double(double)>& Z, double rho, double sigma,
                         int steps) {
  if (!(theta < 1.0)) fail(ErrorKind::InvalidTheta, "theta must be < 1");
  require(theta >= 0.0, ErrorKind::InvalidArgument, "theta must be >= 0");
  require(alpha > 0.0, ErrorKind::InvalidArgument, "alpha must be positive");
  require(A >= 0.0 && B >= 0.0, ErrorKind::InvalidArgument, "A and B must be nonnegative");

  HoleFilling out;
  out.lambda = std::pow(theta, 1.0 / (alpha + 1.0));
  const double contraction = theta > 0.0 ? theta * std::pow(out.lambda, -alpha) : 0.0;
  out.c = std::pow(1.0 - out.lambda, -alpha) / (1.0 - contraction);
  if (!Z) return out;

  require(rho < sigma, ErrorKind::InvalidArgument, "need rho < sigma");
  require(steps >= 2, ErrorKind::InvalidArgument, "need at least two radii");
  std::vector<double> t;
  for (int i = 0; i <= steps; ++i) {
    const double frac = out.lambda > 0.0 ? 1.0 - std::pow(out.lambda, i) : double(i) / steps;
    t.push_back(rho + frac * (sigma - rho));
  }
  t.push_back(sigma);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());

  std::vector<double> z(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) z[i] = Z(t[i]);
  out.samples = int(t.size());
  constexpr double slack = 1e-12;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const double a_term = std::pow(t[j] - t[i], -alpha) * A;
      const double hyp = theta * z[j] + a_term + B;
      if (z[i] > hyp * (1.0 + slack)) out.hypothesis_ok = false;
      if (z[i] > out.c * (a_term + B) * (1.0 + slack)) out.conclusion_ok = false;
    }
  }
  out.verified = out.hypothesis_ok && out.conclusion_ok;
  return out;
}

ContrastRatio linfty_l2_parts(const ScalarField& v) {
  const Grid& g = v.grid();
  const QuadratureOptions opts{8, Interpolation::Quadratic};
  const Region full = Region::disc(g.center(), g.radius());
  const double area = region_area(g, full, opts.subsamples);
  require(area > 0.0, ErrorKind::EmptySubdomain, "grid disc has no quadrature points");
  const double positive = integrate_composed(
      v, full, [](double x) { return x > 0.0 ? x * x : 0.0; }, opts);
  if (!(positive > 0.0)) fail(ErrorKind::ZeroPositivePart, "v is nonpositive on the disc");
  ContrastRatio out;
  out.sup = sup_value(v, Region::disc(g.center(), 0.5 * g.radius()), opts);
  out.mean_square = positive / area;
  out.ratio = out.sup / std::sqrt(out.mean_square);
  return out;
}

double linfty_l2_ratio(const ScalarField& v) { return linfty_l2_parts(v).ratio; }

ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& pairs) {
  require(pairs.size() >= 3, ErrorKind::TooFewSamples, "exponent fit needs >= 3 pairs");
  const Index n = Index(pairs.size());
  Eigen::VectorXd x(n), y(n);
  for (Index i = 0; i < n; ++i) {
    const auto& [scale, value] = pairs[std::size_t(i)];
    require(scale > 0.0 && value > 0.0 && std::isfinite(scale) && std::isfinite(value),
            ErrorKind::InvalidArgument, "exponent fit needs positive finite pairs");
    x(i) = std::log(scale);
    y(i) = std::log(value);
  }
  const double xbar = x.mean(), ybar = y.mean();
  const Eigen::VectorXd dx = x.array() - xbar;
  const double sxx = dx.squaredNorm();
  if (!(sxx > 1e-24 * (1.0 + xbar * xbar) * double(n))) {
    fail(ErrorKind::DegenerateAbscissa, "all scales coincide");
  }
  ExponentFit fit;
  fit.pairs = pairs;
  fit.slope = dx.dot(y.array().matrix() - Eigen::VectorXd::Constant(n, ybar)) / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  const Eigen::VectorXd r = y - (fit.intercept + fit.slope * x.array()).matrix();
  const double sse = r.squaredNorm();
  fit.residual = std::sqrt(sse / double(n));
  const boost::math::students_t dist(double(n - 2));
  fit.half_width =
      boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(sse / double(n - 2) / sxx);
  return fit;
}

Prop2Row prop2_instance(double lambda, const GridPtr& grid) {
  require(lambda >= 1.0 && std::isfinite(lambda), ErrorKind::InvalidArgument,
          "contrast values must be >= 1");
  Mat2 a = Mat2::Zero();
  a(0, 0) = 1.0;
  a(1, 1) = lambda;
  const auto coeff = CoefficientField::constant(grid, a, 1.0, lambda);
  const Vec2 c = grid->center();
  const auto data = ScalarField::from_function(grid, [lambda, c](const Vec2& x) {
    const Vec2 y = x - c;
    return 1.0 + y.y() * y.y() - lambda * y.x() * y.x();
  });
  const auto [v, report] = solve_linear({data, coeff});
  Prop2Row row;
  row.lambda = lambda;
  row.ratio = linfty_l2_parts(v);
  row.residual = report.residual;
  row.max_principle_violation = report.max_principle_violation;
  return row;
}

Prop2Scan prop2_scan(const std::vector<double>& lambdas, int n) {
  require(lambdas.size() >= 3, ErrorKind::TooFewSamples, "contrast scan needs >= 3 values");
  for (double l : lambdas) {
    require(l >= 1.0 && std::isfinite(l), ErrorKind::InvalidArgument, "contrast values must be >= 1");
  }
  const GridPtr grid = build_grid(Domain::unit_disc(), n);
  Prop2Scan scan;
  scan.resolution = n;
  std::vector<std::pair<double, double>> pairs;
  for (double lambda : lambdas) {
    scan.rows.push_back(prop2_instance(lambda, grid));
    pairs.emplace_back(lambda, scan.rows.back().ratio.ratio);
  }
  scan.fit = exponent_fit(pairs);
  return scan;
}

EstimateReport check_caccioppoli(const ScalarField& u, const Integrand& F, const Ball& ball,
                                 double budget) {
  const Grid& g = u.grid();
  require_ball_inside(g, ball);
  const GrowthParams& P = F.params();
  const Points2 nodal = nodal_gradient(u);
  Eigen::VectorXd e_nodal(g.num_nodes());
  for (Index i = 0; i < g.num_nodes(); ++i) e_nodal(i) = e_mu(nodal.row(i).norm(), P.mu, P.p);
  const ScalarField E(u.grid_ptr(), std::move(e_nodal));
  const Eigen::VectorXd grad_e_sq = gradient(E).values.rowwise().squaredNorm();

  const GradientField grads = gradient(u);
  Eigen::VectorXd e_sq(g.num_triangles());
  for (Index t = 0; t < g.num_triangles(); ++t) {
    const double e = e_mu(grads.values.row(t).norm(), P.mu, P.p);
    e_sq(t) = e * e;
  }
  const Region outer = ball.region();
  const double area = region_area(g, outer);
  require(area > 0.0, ErrorKind::EmptySubdomain, "ball contains no quadrature point");
  const double sup_grad = gradient_linf_norm(u, outer);

  EstimateReport r;
  r.name = "caccioppoli";
  r.budget = budget;
  r.lhs = integrate_cells(g, grad_e_sq, ball.scaled(0.5).region());
  const double weight = 1.0 + std::pow(sup_grad, P.q - P.p);
  r.rhs = weight * integrate_cells(g, e_sq, outer) / area;
  echo_ball(r, ball);
  r.params["p"] = P.p;
  r.params["q"] = P.q;
  r.params["mu"] = P.mu;
  r.params["h"] = g.spacing();
  r.terms["grad_linf"] = sup_grad;
  r.terms["weight"] = weight;
  r.terms["ball_area"] = area;
  r.provenance["E_mu"] = "nodal average of triangle gradients, then P1 gradient";
  r.conclude();
  return r;
}

EstimateReport check_theorem1(const ScalarField& u, const Integrand& F, const GrowthParams& params,
                              const Ball& ball, double budget) {
  const double p = params.p, q = params.q;
  if (!(q < 3.0 * p)) fail(ErrorKind::ExponentOutOfRange, "Lipschitz bound needs q < 3p");
  const Grid& g = u.grid();
  require_ball_inside(g, ball);
  const Region outer = ball.region();
  const double area = region_area(g, outer);
  require(area > 0.0, ErrorKind::EmptySubdomain, "ball contains no quadrature point");

  const GradientField grads = gradient(u);
  Eigen::VectorXd f(g.num_triangles()), hp(g.num_triangles());
  for (Index t = 0; t < g.num_triangles(); ++t) {
    const Vec2 z = grads.values.row(t).transpose();
    f(t) = F.value(z);
    hp(t) = std::pow(h_mu(z, params.mu), 0.5 * p);
  }
  const double mean_f = integrate_cells(g, f, outer) / area;
  const double mean_h = integrate_cells(g, hp, outer) / area;
  const double gap = 2.0 / (3.0 * p - q);

  EstimateReport r;
  r.name = "theorem1";
  r.budget = budget;
  r.lhs = gradient_linf_norm(u, ball.scaled(0.5).region());
  const double term1 = std::pow(mean_f, 1.0 / p);
  const double term2 = std::pow(mean_f, gap);
  r.rhs = term1 + term2;
  echo_ball(r, ball);
  r.params["p"] = p;
  r.params["q"] = q;
  r.params["mu"] = params.mu;
  r.params["h"] = g.spacing();
  r.terms["mean_F"] = mean_f;
  r.terms["term_1_over_p"] = term1;
  r.terms["term_gap"] = term2;
  r.terms["mean_H_p2"] = mean_h;
  const double rhs_pth = mean_h + std::pow(mean_h, gap);
  r.terms["lhs_pth_power"] = std::pow(r.lhs, p);
  r.terms["rhs_pth_power"] = rhs_pth;
  r.terms["implied_pth_power"] = rhs_pth > 0.0 ? std::pow(r.lhs, p) / rhs_pth : 0.0;
  r.provenance["lhs"] = "max over triangles with centroid in the half ball";
  r.provenance["means"] = "per-triangle values, 4x4 sub-samples with center in the ball";
  r.conclude();
  return r;
}

}  // namespace pqlab
