#include "pqlab/integrand.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pqlab/error.hpp"

namespace pqlab {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Value, gradient and Hessian of H_μ(z)^{s/2}.
void add_power_term(double coefficient, double s, double mu, const Vec2& z, Evaluation& out) {
  const double H = h_mu(z, mu);
  if (H == 0.0) {
    // Only reachable with μ = 0, z = 0; s < 2 is rejected before this point.
    if (s == 2.0) out.hessian += coefficient * 2.0 * Mat2::Identity();
    return;
  }
  const double P = half_power(H, s);
  const double P1 = P / H;
  const double P2 = P1 / H;
  out.value += coefficient * P;
  out.gradient += coefficient * s * P1 * z;
  out.hessian += coefficient * s * P1 * Mat2::Identity();
  if (s != 2.0) out.hessian += coefficient * s * (s - 2.0) * P2 * (z * z.transpose());
}

double spectral_norm(const Mat2& m) {
  Eigen::SelfAdjointEigenSolver<Mat2> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Mat2& m) {
  Eigen::SelfAdjointEigenSolver<Mat2> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

class ModelPQ final : public Integrand::Impl {
 public:
  ModelPQ(double coeff_p, double coeff_q, GrowthParams params)
      : coeff_p_(coeff_p), coeff_q_(coeff_q), params_(params) {}

  IntegrandFamily family() const override { return IntegrandFamily::ModelPQ; }
  const GrowthParams& params() const override { return params_; }

  double value(const Vec2& z) const override {
    const double H = h_mu(z, params_.mu);
    return coeff_p_ * half_power(H, params_.p) + coeff_q_ * half_power(H, params_.q);
  }

  Evaluation evaluate(const Vec2& z) const override {
    Evaluation out;
    add_power_term(coeff_p_, params_.p, params_.mu, z, out);
    add_power_term(coeff_q_, params_.q, params_.mu, z, out);
    return out;
  }

  std::string describe() const override {
    return "model_pq(p=" + fmt_double(params_.p) + ", q=" + fmt_double(params_.q) +
           ", mu=" + fmt_double(params_.mu) + ", nu=" + fmt_double(coeff_p_) +
           ", nu_tilde=" + fmt_double(coeff_q_) + ")";
  }

 private:
  double coeff_p_;
  double coeff_q_;
  GrowthParams params_;
};

class Custom final : public Integrand::Impl {
 public:
  Custom(GrowthParams params, std::string name, std::function<Evaluation(const Vec2&)> fn)
      : params_(params), name_(std::move(name)), fn_(std::move(fn)) {}

  IntegrandFamily family() const override { return IntegrandFamily::Custom; }
  const GrowthParams& params() const override { return params_; }
  double value(const Vec2& z) const override { return fn_(z).value; }
  Evaluation evaluate(const Vec2& z) const override { return fn_(z); }
  std::string describe() const override { return "custom(" + name_ + ")"; }

 private:
  GrowthParams params_;
  std::string name_;
  std::function<Evaluation(const Vec2&)> fn_;
};

class Mollified final : public Integrand::Impl {
 public:
  Mollified(Integrand base, Mollifier mollifier)
      : base_(std::move(base)), mollifier_(std::move(mollifier)), params_(base_.params()) {}

  void set_mu(double mu) { params_.mu = mu; }

  IntegrandFamily family() const override { return IntegrandFamily::Mollified; }
  const GrowthParams& params() const override { return params_; }

  double value(const Vec2& z) const override {
    const auto& y = mollifier_.nodes();
    const auto& w = mollifier_.weights();
    double sum = 0.0;
    for (Index k = 0; k < w.size(); ++k) sum += w(k) * base_.value(z - y.row(k).transpose());
    return sum;
  }

  Evaluation evaluate(const Vec2& z) const override {
    const auto& y = mollifier_.nodes();
    const auto& w = mollifier_.weights();
    Evaluation out;
    for (Index k = 0; k < w.size(); ++k) {
      const Evaluation e = base_.impl().evaluate(z - y.row(k).transpose());
      out.value += w(k) * e.value;
      out.gradient += w(k) * e.gradient;
      out.hessian += w(k) * e.hessian;
    }
    return out;
  }

  std::string describe() const override {
    return "mollified(" + base_.describe() + ", delta=" + fmt_double(mollifier_.delta()) + ")";
  }

  const Integrand& base() const { return base_; }
  double delta() const { return mollifier_.delta(); }

 private:
  Integrand base_;
  Mollifier mollifier_;
  GrowthParams params_;
};

class Regularized final : public Integrand::Impl {
 public:
  Regularized(Integrand inner, double eps, double delta, double sigma, double shift, double q,
              GrowthParams params)
      : inner_(std::move(inner)),
        eps_(eps),
        delta_(delta),
        sigma_(sigma),
        shift_(shift),
        q_(q),
        params_(params) {}

  IntegrandFamily family() const override { return IntegrandFamily::Regularized; }
  const GrowthParams& params() const override { return params_; }

  double value(const Vec2& z) const override {
    return inner_.value(z) + sigma_ * half_power(shift_ + z.squaredNorm(), q_);
  }

  Evaluation evaluate(const Vec2& z) const override {
    Evaluation out = inner_.impl().evaluate(z);
    add_power_term(sigma_, q_, std::sqrt(shift_), z, out);
    return out;
  }

  std::string describe() const override {
    return "regularized(" + inner_.describe() + ", eps=" + fmt_double(eps_) +
           ", sigma=" + fmt_double(sigma_) + ")";
  }

  const Integrand& inner() const { return inner_; }
  double delta() const { return delta_; }
  double sigma() const { return sigma_; }

 private:
  Integrand inner_;
  double eps_;
  double delta_;
  double sigma_;
  double shift_;  // μ + δ
  double q_;
  GrowthParams params_;
};

struct WorstBound {
  double ratio = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  Index sample = -1;
  int line = 0;
};

void track(WorstBound& worst, double lhs, double rhs, Index sample, int line) {
  double ratio;
  if (rhs > 0.0) {
    ratio = lhs / rhs;
  } else {
    ratio = lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  if (ratio > worst.ratio || worst.sample < 0) {
    worst = {ratio, lhs, rhs, sample, line};
  }
}

// Lines: 1 lower bound on F, 2 upper bound on F, 3 Hessian norm, 4 Hessian
// lower bound. An empty xi list checks line 4 through the smallest eigenvalue.
WorstBound worst_growth_ratio(const Integrand& F, const GrowthParams& P,
                              const std::vector<Vec2>& samples, const std::vector<Vec2>& xis) {
  WorstBound worst;
  for (Index i = 0; i < Index(samples.size()); ++i) {
    const Vec2& z = samples[i];
    const Evaluation e = F.evaluate(z);
    const double H = h_mu(z, P.mu);
    const double Hp = half_power(H, P.p);
    const double Hq = half_power(H, P.q);
    const double Hp2 = std::pow(H, (P.p - 2.0) / 2.0);
    const double Hq2 = std::pow(H, (P.q - 2.0) / 2.0);

    track(worst, P.nu * Hp + P.nu_tilde * Hq, e.value, i, 1);
    track(worst, e.value, P.lambda_up * (Hq + Hp), i, 2);
    track(worst, spectral_norm(e.hessian), P.lambda_up * (Hq2 + Hp2), i, 3);

    const double lower = P.nu * Hp2 + P.nu_tilde * Hq2;
    if (xis.empty()) {
      track(worst, lower, min_eigenvalue(e.hessian), i, 4);
    } else {
      for (const Vec2& xi : xis) {
        track(worst, lower * xi.squaredNorm(), xi.dot(e.hessian * xi), i, 4);
      }
    }
  }
  return worst;
}

// Deterministic sample set for fitting μ_δ of wrapped integrands.
std::vector<Vec2> fitting_samples() {
  std::vector<Vec2> out;
  const double radii[] = {0.0, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  constexpr int angles = 5;
  for (double r : radii) {
    for (int a = 0; a < angles; ++a) {
      const double t = 0.3 + a * 2.0 * std::numbers::pi / angles;
      out.emplace_back(r * std::cos(t), r * std::sin(t));
      if (r == 0.0) break;
    }
  }
  return out;
}

bool bounds_hold(const Integrand& F, const GrowthParams& P, const std::vector<Vec2>& samples) {
  return worst_growth_ratio(F, P, samples, {}).ratio <= 1.0 + 1e-9;
}

}  // namespace

std::string to_string(IntegrandFamily family) {
  switch (family) {
    case IntegrandFamily::ModelPQ: return "model_pq";
    case IntegrandFamily::Mollified: return "mollified";
    case IntegrandFamily::Regularized: return "regularized";
    case IntegrandFamily::Custom: return "custom";
  }
  return "unknown";
}

void validate(const GrowthParams& P, bool theorem_mode) {
  require(P.p > 1.0 && P.p <= P.q && std::isfinite(P.q), ErrorKind::InvalidArgument,
          "growth exponents must satisfy 1 < p <= q < inf");
  require(P.nu > 0.0 && P.lambda_up >= P.nu, ErrorKind::InvalidArgument,
          "ellipticity constants must satisfy 0 < nu <= lambda");
  require(P.nu_tilde >= 0.0, ErrorKind::InvalidArgument, "nu_tilde must be non-negative");
  if (P.regularized()) {
    require(P.mu > 0.0 && P.mu <= 2.0, ErrorKind::InvalidArgument,
            "regularized integrands need 0 < mu <= 2");
  } else {
    require(P.mu >= 0.0 && P.mu <= 1.0, ErrorKind::InvalidArgument, "mu must lie in [0, 1]");
  }
  if (theorem_mode) {
    require(P.q < 3.0 * P.p, ErrorKind::ExponentOutOfRange,
            "the Lipschitz estimate needs q < 3p");
  }
}

Integrand::Integrand(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {
  require(impl_ != nullptr, ErrorKind::InvalidArgument, "null integrand");
}

Evaluation Integrand::evaluate(const Vec2& z) const {
  const GrowthParams& P = impl_->params();
  if (P.mu == 0.0 && P.p < 2.0 && z.isZero(0.0)) {
    fail(ErrorKind::DegenerateOrigin, "Hessian is singular at z = 0 for mu = 0 and p < 2");
  }
  return impl_->evaluate(z);
}

GrowthParams model_pq_params(double p, double q, double mu, double nu, double nu_tilde) {
  require(nu > 0.0 && nu_tilde >= 0.0, ErrorKind::InvalidArgument,
          "model coefficients must satisfy nu > 0, nu_tilde >= 0");
  // Eigenvalues of ∂²H^{s/2} are s·H^{(s-2)/2} and s·H^{(s-2)/2}(1 + (s-2)|z|²/H).
  auto lower_factor = [](double s) { return std::min(1.0, s * std::min(1.0, s - 1.0)); };
  auto upper_factor = [](double s) { return std::max(1.0, s * std::max(1.0, s - 1.0)); };
  GrowthParams P;
  P.p = p;
  P.q = q;
  P.mu = mu;
  P.nu = nu * lower_factor(p);
  P.nu_tilde = nu_tilde * lower_factor(q);
  P.lambda_up = std::max(nu, nu_tilde) * std::max(upper_factor(p), upper_factor(q));
  return P;
}

Integrand make_model_pq(double p, double q, double mu, double nu, double nu_tilde) {
  require(p > 1.0 && p <= q && std::isfinite(q), ErrorKind::InvalidArgument,
          "growth exponents must satisfy 1 < p <= q < inf");
  require(mu >= 0.0 && mu <= 2.0, ErrorKind::InvalidArgument, "mu must lie in [0, 2]");
  return Integrand(std::make_shared<ModelPQ>(nu, nu_tilde, model_pq_params(p, q, mu, nu, nu_tilde)));
}

Integrand make_custom(const GrowthParams& params, std::string name,
                      std::function<Evaluation(const Vec2&)> evaluate) {
  return Integrand(std::make_shared<Custom>(params, std::move(name), std::move(evaluate)));
}

EstimateReport verify_growth_bounds(const Integrand& F, const std::vector<Vec2>& samples,
                                    const std::vector<Vec2>& xi_samples, double tolerance) {
  return verify_growth_bounds(F, F.params(), samples, xi_samples, tolerance);
}

EstimateReport verify_growth_bounds(const Integrand& F, const GrowthParams& params,
                                    const std::vector<Vec2>& samples,
                                    const std::vector<Vec2>& xi_samples, double tolerance) {
  require(!samples.empty() && !xi_samples.empty(), ErrorKind::TooFewSamples,
          "growth bound check needs z and xi samples");

  const WorstBound worst = worst_growth_ratio(F, params, samples, xi_samples);

  EstimateReport report;
  report.name = params.regularized() ? "growth_bounds_regularized" : "growth_bounds";
  report.lhs = worst.lhs;
  report.rhs = worst.rhs;
  report.budget = 1.0 + tolerance;
  report.params = {{"p", params.p},   {"q", params.q},
                   {"mu", params.mu}, {"nu", params.nu},
                   {"lambda", params.lambda_up}, {"nu_tilde", params.nu_tilde}};
  report.conclude_with(worst.ratio);
  const Vec2& z = samples[worst.sample];
  report.terms = {{"worst_line", double(worst.line)},
                  {"worst_z1", z.x()},
                  {"worst_z2", z.y()},
                  {"samples", double(samples.size())}};
  report.provenance["integrand"] = F.describe();
  if (!report.pass) {
    std::ostringstream os;
    os.precision(17);
    os << "bound line " << worst.line << " violated at z = (" << z.x() << ", " << z.y()
       << "): ratio " << worst.ratio;
    report.notes.push_back(os.str());
  }
  return report;
}

double measure_gradient_constant(const Integrand& F, const std::vector<Vec2>& samples) {
  const GrowthParams& P = F.params();
  double worst = 0.0;
  for (const Vec2& z : samples) {
    const double H = h_mu(z, P.mu);
    const double bound = std::pow(H, (P.q - 1.0) / 2.0) + std::pow(H, (P.p - 1.0) / 2.0);
    if (bound > 0.0) worst = std::max(worst, F.evaluate(z).gradient.norm() / bound);
  }
  return worst;
}

Integrand mollify_integrand(const Integrand& F, double delta) {
  require(delta > 0.0 && delta < 1.0, ErrorKind::InvalidArgument,
          "mollification radius must lie in (0, 1)");
  auto impl = std::make_shared<Mollified>(F, Mollifier(delta));
  Integrand candidate(impl);

  // μ_δ ladder: sqrt(μ² + t·m₂(δ)) for increasing t, capped at 2.
  const double mu = F.params().mu;
  const double m2 = Mollifier(delta).second_moment();
  const std::vector<Vec2> samples = fitting_samples();
  const double ladder[] = {1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 32.0, 64.0};
  double chosen = std::min(2.0, std::sqrt(mu * mu + m2));
  // F_δ is smooth at the origin; a positive μ keeps the degenerate-origin
  // guard of Integrand::evaluate from firing during the fit.
  impl->set_mu(chosen);
  for (double t : ladder) {
    const double trial = std::min(2.0, std::sqrt(mu * mu + t * m2));
    GrowthParams P = F.params();
    P.mu = trial;
    if (bounds_hold(candidate, P, samples)) {
      chosen = trial;
      break;
    }
    if (trial >= 2.0) break;
  }
  impl->set_mu(chosen);
  return candidate;
}

double sigma_eps(double eps, double grad_field_q_norm) {
  require(eps > 0.0 && eps < 1.0, ErrorKind::InvalidArgument, "eps must lie in (0, 1)");
  require(grad_field_q_norm >= 0.0, ErrorKind::InvalidArgument, "norm must be non-negative");
  return 1.0 / (1.0 + 1.0 / eps + grad_field_q_norm);
}

Integrand regularize(const Integrand& F_delta, double eps, double delta, double sigma, double mu,
                     double q) {
  require(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0, ErrorKind::InvalidArgument,
          "eps and delta must lie in (0, 1)");
  require(sigma > 0.0 && sigma < 1.0, ErrorKind::InvalidArgument, "sigma must lie in (0, 1)");
  require(mu >= 0.0, ErrorKind::InvalidArgument, "mu must be non-negative");
  const GrowthParams& inner = F_delta.params();
  require(inner.mu > 0.0, ErrorKind::InvalidArgument,
          "regularization expects a mollified integrand with mu_delta > 0");
  require(q >= inner.p, ErrorKind::InvalidArgument, "q must not be below p");

  // Constants of σ·H'^{q/2} with H' = μ + δ + |z|² relative to H = μ_δ² + |z|²;
  // H'/H ranges over [rho_lo, rho_hi].
  const double shift = mu + delta;
  const double mu_reg = inner.mu;
  const double rho = shift / (mu_reg * mu_reg);
  const double rho_lo = std::min(1.0, rho);
  const double rho_hi = std::max(1.0, rho);
  const double e = (q - 2.0) / 2.0;
  const double value_lower = std::pow(rho_lo, q / 2.0);
  const double value_upper = std::pow(rho_hi, q / 2.0);
  const double hess_lower = q * std::min(1.0, q - 1.0) * std::pow(e >= 0.0 ? rho_lo : rho_hi, e);
  const double hess_upper = q * std::max(1.0, q - 1.0) * std::pow(e >= 0.0 ? rho_hi : rho_lo, e);

  GrowthParams P;
  P.p = inner.p;
  P.q = q;
  P.mu = mu_reg;
  P.nu = inner.nu;
  P.nu_tilde = sigma * std::min(value_lower, hess_lower);
  P.lambda_up = inner.lambda_up + sigma * std::max(value_upper, hess_upper);
  return Integrand(std::make_shared<Regularized>(F_delta, eps, delta, sigma, shift, q, P));
}

const Integrand* wrapped_integrand(const Integrand& F) {
  if (auto* m = dynamic_cast<const Mollified*>(&F.impl())) return &m->base();
  if (auto* r = dynamic_cast<const Regularized*>(&F.impl())) return &r->inner();
  return nullptr;
}

double mollification_radius(const Integrand& F) {
  if (auto* m = dynamic_cast<const Mollified*>(&F.impl())) return m->delta();
  if (auto* r = dynamic_cast<const Regularized*>(&F.impl())) return r->delta();
  return 0.0;
}

double regularization_sigma(const Integrand& F) {
  if (auto* r = dynamic_cast<const Regularized*>(&F.impl())) return r->sigma();
  return 0.0;
}

}  // namespace pqlab
