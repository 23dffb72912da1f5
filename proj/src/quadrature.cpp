#include "pqlab/quadrature.hpp"

#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pqlab/error.hpp"

namespace pqlab {

namespace {

// Legendre P_n and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

GaussRule gauss_legendre(int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "gauss_legendre needs n >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes(0) = 0.0;
    rule.weights(0) = 2.0;
    return rule;
  }

  // Golub–Welsch for the starting nodes, polished with Newton on P_n.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
  for (int i = 0; i < n; ++i) {
    double x = eig.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      const auto [p, dp] = legendre(n, x);
      x -= p / dp;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    rule.nodes(i) = x;
    rule.weights(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double bump_mass() {
  using boost::math::quadrature::gauss_kronrod;
  auto radial = [](double r) { return r * bump_profile(r); };
  const double integral = gauss_kronrod<double, 61>::integrate(radial, 0.0, 1.0, 20, 1e-15);
  return 2.0 * std::numbers::pi * integral;
}

Mollifier::Mollifier(double delta, int radial_order, int angular_order)
    : delta_(delta), normalization_(bump_mass()) {
  require(delta > 0.0, ErrorKind::InvalidArgument, "mollifier radius must be positive");
  require(radial_order >= 2 && angular_order >= 4, ErrorKind::InvalidArgument,
          "mollifier quadrature order too low");

  const GaussRule radial = gauss_legendre(radial_order);
  const Index count = Index(radial_order) * angular_order;
  nodes_.resize(count, 2);
  weights_.resize(count);

  const double dtheta = 2.0 * std::numbers::pi / angular_order;
  Index k = 0;
  for (int i = 0; i < radial_order; ++i) {
    const double t = 0.5 * (radial.nodes(i) + 1.0);
    const double radial_weight = 0.5 * radial.weights(i) * t * bump_profile(t) / normalization_;
    for (int j = 0; j < angular_order; ++j, ++k) {
      const double theta = (j + 0.5) * dtheta;
      nodes_(k, 0) = delta * t * std::cos(theta);
      nodes_(k, 1) = delta * t * std::sin(theta);
      weights_(k) = radial_weight * dtheta;
    }
  }

  const double m = mass();
  if (std::abs(m - 1.0) > kMassTolerance) {
    fail(ErrorKind::QuadratureFailure,
         "mollifier rule mass deviates from one by " + std::to_string(m - 1.0));
  }
}

double Mollifier::density(const Vec2& y) const {
  return bump_profile(y.norm() / delta_) / (normalization_ * delta_ * delta_);
}

double Mollifier::second_moment() const {
  return weights_.dot(nodes_.rowwise().squaredNorm());
}

}  // namespace pqlab
