#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pqlab/grid.hpp"
#include "pqlab/integrand.hpp"
#include "pqlab/report.hpp"

namespace pqlab {

/// Implied-constant budgets: 10× the largest value observed on the bundled
/// reference runs (slice_pick 0.438, prop2_bound 1.187, caccioppoli 0.658,
/// theorem1_sweep 0.243), rounded up.
namespace budgets {
inline constexpr double slice_pick = 4.4;
inline constexpr double contrast = 11.9;
inline constexpr double caccioppoli = 6.6;
inline constexpr double theorem1 = 2.5;
}  // namespace budgets

/// Disc {|x − center| ≤ radius}.
struct Ball {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;

  Region region() const { return Region::disc(center, radius); }
  Ball scaled(double factor) const { return {center, factor * radius}; }
};

/// ‖u − (u)_I‖_∞ ≤ √2 ‖u − (u)_I‖₂^{1/2} ‖u′‖₂^{1/2} for the piecewise-linear
/// interpolant of equally spaced samples. All norms are exact for that
/// interpolant; the verdict allows `allowance` on top of the right side.
EstimateReport check_interpolation_1d(const Eigen::VectorXd& samples, double h,
                                      double allowance = 1e-8);

/// inf_{r∈(ρ,σ)} ‖u‖_{L∞(S_r)} against (σ−ρ)^{−1/2}(‖u‖₂ + ‖u‖₂^{1/2}‖∇u‖₂^{1/2}),
/// all norms on the annulus B_σ \ B_ρ around the grid center.
EstimateReport check_slice_pick(const ScalarField& u, double rho, double sigma,
                                double budget = budgets::slice_pick);

struct HoleFilling {
  double c = 1.0;
  double lambda = 0.0;
  bool hypothesis_ok = true;
  bool conclusion_ok = true;
  bool verified = false;  // both checks ran on a supplied Z and passed
  int samples = 0;
};

/// Constant of the iteration lemma from the geometric-sequence argument with
/// λ = θ^{1/(α+1)}, so θλ^{−α} = λ < 1 and c = (1−λ)^{−α}/(1−θλ^{−α}).
///
/// With Z supplied on [rho, sigma] the hypothesis
/// Z(s) ≤ θZ(t) + (t−s)^{−α}A + B is sampled on all pairs s < t of the radii
/// t_i = ρ + (1−λ^i)(σ−ρ) (or a uniform sequence when θ = 0), and the
/// conclusion Z(s) ≤ c((σ−s)^{−α}A + B) is checked at every sampled s.
HoleFilling hole_filling(double theta, double alpha, double A, double B,
                         const std::function<double(double)>& Z = {}, double rho = 0.0,
                         double sigma = 1.0, int steps = 48);

struct ContrastRatio {
  double sup = 0.0;          // sup of v over the half-radius disc
  double mean_square = 0.0;  // mean of v₊² over the full disc
  double ratio = 0.0;
};

/// sup_{B_{R/2}} v / (⨍_{B_R} v₊²)^{1/2} on the disc of the grid. Uses the
/// biquadratic reconstruction with 8×8 sub-samples per cell so that thin
/// positive sets are resolved. Throws ZeroPositivePart when v₊ ≡ 0.
ContrastRatio linfty_l2_parts(const ScalarField& v);
double linfty_l2_ratio(const ScalarField& v);

/// Least-squares slope of log(value) on log(scale).
ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& pairs);

struct Prop2Row {
  double lambda = 0.0;
  ContrastRatio ratio;
  double residual = 0.0;
  double max_principle_violation = 0.0;
};

struct Prop2Scan {
  std::vector<Prop2Row> rows;
  ExponentFit fit;
  int resolution = 0;
};

/// Solves −∇·(diag(1,Λ)∇v) = 0 on `grid` with boundary values 1 + x₂² − Λx₁²
/// (coordinates relative to the grid center) and measures the contrast ratio.
Prop2Row prop2_instance(double lambda, const GridPtr& grid);

/// Solves −∇·(diag(1,Λ)∇v) = 0 on the unit disc with boundary values
/// 1 + x₂² − Λx₁² for every Λ and fits ratio against Λ.
Prop2Scan prop2_scan(const std::vector<double>& lambdas, int n);

/// ∫_{½B}|∇E_μ(∇u)|² against (1 + ‖∇u‖_{L∞(B)}^{q−p}) |B|^{−1} ∫_B |E_μ(∇u)|².
/// E_μ is evaluated at nodal-averaged gradients and differentiated as a P1 field.
EstimateReport check_caccioppoli(const ScalarField& u, const Integrand& F, const Ball& ball,
                                 double budget = budgets::caccioppoli);

/// ‖∇u‖_{L∞(½B)} against (⨍_B F(∇u))^{1/p} + (⨍_B F(∇u))^{2/(3p−q)}. The
/// p-th power variant with ⨍_B H_μ^{p/2} is stored in `terms` as
/// implied_pth_power. Throws ExponentOutOfRange when q ≥ 3p.
EstimateReport check_theorem1(const ScalarField& u, const Integrand& F, const GrowthParams& params,
                              const Ball& ball, double budget = budgets::theorem1);

}  // namespace pqlab
