#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pqlab/quadrature.hpp"
#include "pqlab/report.hpp"
#include "pqlab/types.hpp"

namespace pqlab {

/// Exponents and ellipticity constants of a (p,q)-growth integrand.
///
/// `nu`, `lambda_up` and `nu_tilde` are the constants for which the growth
/// bounds are claimed to hold. `nu_tilde == 0` is the plain (p,q)-growth
/// setting; `nu_tilde > 0` additionally claims lower q-ellipticity.
struct GrowthParams {
  double p = 2.0;
  double q = 2.0;
  double mu = 0.0;
  double nu = 1.0;
  double lambda_up = 1.0;
  double nu_tilde = 0.0;

  bool regularized() const { return nu_tilde > 0.0; }
};

/// Throws InvalidArgument when the invariants fail. With `theorem_mode` the
/// gap condition q < 3p is enforced as ExponentOutOfRange.
void validate(const GrowthParams& params, bool theorem_mode = false);

/// μ² + |z|².
template <typename Derived>
typename Derived::Scalar h_mu(const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar mu) {
  return mu * mu + z.squaredNorm();
}

/// (1/p)(H_μ(z)^{p/2} − μ^p).
template <typename Derived>
typename Derived::Scalar e_mu(const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar mu,
                              typename Derived::Scalar p) {
  using std::pow;
  return (pow(h_mu(z, mu), p / 2) - pow(mu, p)) / p;
}

/// Scalar versions used on gradient moduli.
inline double h_mu(double t, double mu) { return mu * mu + t * t; }
inline double e_mu(double t, double mu, double p) {
  return (std::pow(h_mu(t, mu), p / 2) - std::pow(mu, p)) / p;
}

/// base^{s/2}, with integer and half-integer s handled by multiplication.
template <typename Scalar>
Scalar half_power(Scalar base, Scalar s) {
  using std::sqrt;
  const Scalar twice = s;
  const long k = std::lround(twice);
  if (std::abs(twice - Scalar(k)) < Scalar(1e-14) && k >= 0 && k <= 24) {
    Scalar result(1);
    for (long i = 0; i < k / 2; ++i) result *= base;
    if (k % 2 != 0) result *= sqrt(base);
    return result;
  }
  using std::pow;
  return pow(base, s / 2);
}

struct Evaluation {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};

enum class IntegrandFamily { ModelPQ, Mollified, Regularized, Custom };

std::string to_string(IntegrandFamily family);

/// Convex energy density F on the plane together with its gradient and Hessian.
/// Immutable; copies share the underlying implementation and evaluation is
/// reentrant.
class Integrand {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual IntegrandFamily family() const = 0;
    virtual const GrowthParams& params() const = 0;
    virtual double value(const Vec2& z) const = 0;
    virtual Evaluation evaluate(const Vec2& z) const = 0;
    virtual std::string describe() const = 0;
  };

  explicit Integrand(std::shared_ptr<const Impl> impl);

  IntegrandFamily family() const { return impl_->family(); }
  const GrowthParams& params() const { return impl_->params(); }
  std::string describe() const { return impl_->describe(); }

  double value(const Vec2& z) const { return impl_->value(z); }

  /// Throws DegenerateOrigin at z = 0 when μ = 0 and p < 2.
  Evaluation evaluate(const Vec2& z) const;

  const Impl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Certified growth constants of ν·H_μ^{p/2} + ν̃·H_μ^{q/2}.
GrowthParams model_pq_params(double p, double q, double mu, double nu, double nu_tilde);

/// F(z) = ν·H_μ(z)^{p/2} + ν̃·H_μ(z)^{q/2}.
Integrand make_model_pq(double p, double q, double mu, double nu, double nu_tilde);

/// Integrand backed by a user callable, used for test stubs and ad hoc densities.
Integrand make_custom(const GrowthParams& params, std::string name,
                      std::function<Evaluation(const Vec2&)> evaluate);

/// Checks the growth bounds of F at every sample: the lower and upper bound on
/// F, the bound on |∂²F| (spectral norm) and the lower bound on ⟨∂²F ξ, ξ⟩
/// for every ξ sample. With nu_tilde > 0 the q-terms enter the lower bounds.
///
/// The report's implied constant is the worst ratio actual/bound over all
/// upper bounds and bound/actual over all lower bounds; the verdict passes iff
/// it stays within 1 + tolerance. The worst sample is echoed in `terms`.
EstimateReport verify_growth_bounds(const Integrand& F, const std::vector<Vec2>& samples,
                                    const std::vector<Vec2>& xi_samples,
                                    double tolerance = 1e-9);

/// Same check against explicit constants instead of F.params().
EstimateReport verify_growth_bounds(const Integrand& F, const GrowthParams& params,
                                    const std::vector<Vec2>& samples,
                                    const std::vector<Vec2>& xi_samples,
                                    double tolerance = 1e-9);

/// max_z |∂F(z)| / (H_μ^{(q−1)/2} + H_μ^{(p−1)/2}) over the samples: an
/// empirical value for the gradient growth constant Λ′.
double measure_gradient_constant(const Integrand& F, const std::vector<Vec2>& samples);

/// F_δ = F ∗ φ_δ evaluated with the mollifier's convolution rule. The returned
/// integrand carries the smallest μ_δ ∈ [μ, 2] (from a fixed candidate ladder)
/// for which the growth bounds hold on an internal sample set.
Integrand mollify_integrand(const Integrand& F, double delta);

/// σ_ε = 1 / (1 + 1/ε + ‖∇ū_ε‖^q_{L^q}).
double sigma_eps(double eps, double grad_field_q_norm);

/// F_{ε,δ}(z) = F_δ(z) + σ·(μ + δ + |z|²)^{q/2}.
Integrand regularize(const Integrand& F_delta, double eps, double delta, double sigma, double mu,
                     double q);

/// Accessors for wrapped families; they return nullptr / 0 for other families.
const Integrand* wrapped_integrand(const Integrand& F);
double mollification_radius(const Integrand& F);
double regularization_sigma(const Integrand& F);

}  // namespace pqlab
