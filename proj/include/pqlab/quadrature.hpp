#pragma once

#include <cmath>

#include <Eigen/Core>

#include "pqlab/types.hpp"

namespace pqlab {

/// Gauss–Legendre rule with `n` nodes on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussRule gauss_legendre(int n);

/// Unnormalized bump exp(-1/(1 - t^2)) for |t| < 1, zero otherwise.
template <typename Scalar>
Scalar bump_profile(Scalar t) {
  using std::exp;
  const Scalar s = t * t;
  if (s >= Scalar(1)) return Scalar(0);
  return exp(Scalar(-1) / (Scalar(1) - s));
}

/// Mass of the unnormalized bump over the plane, 2π ∫_0^1 r·bump(r) dr,
/// computed by adaptive Gauss–Kronrod (independent of the polar rule).
double bump_mass();

/// Smooth, radially symmetric, unit-mass mollifier supported in the disc of
/// radius `delta`, together with the convolution rule used everywhere a
/// quantity is mollified (integrands and fields).
///
/// The rule is polar: Gauss–Legendre in the radius times a uniform angular
/// sampling. Node weights already include the density, so for a function f,
/// (f * φ_δ)(z) ≈ Σ_k w_k f(z - y_k).
class Mollifier {
 public:
  static constexpr int kDefaultRadialOrder = 40;
  static constexpr int kDefaultAngularOrder = 24;
  static constexpr double kMassTolerance = 1e-10;

  explicit Mollifier(double delta, int radial_order = kDefaultRadialOrder,
                     int angular_order = kDefaultAngularOrder);

  double delta() const { return delta_; }
  Index size() const { return weights_.size(); }
  const Points2& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  /// φ_δ(y) = bump(|y|/δ) / (mass · δ²).
  double density(const Vec2& y) const;

  /// Σ w_k; equals one to within kMassTolerance.
  double mass() const { return weights_.sum(); }

  /// Σ w_k |y_k|², the second moment m₂(δ) of the discrete rule.
  double second_moment() const;

 private:
  double delta_;
  double normalization_;
  Points2 nodes_;
  Eigen::VectorXd weights_;
};

}  // namespace pqlab
