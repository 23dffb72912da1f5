#include "pqlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pqlab/error.hpp"

namespace pqlab {

const std::vector<std::string>& boundary_families() {
  static const std::vector<std::string> names{"affine", "harmonic_quadratic", "counterexample",
                                              "bump", "random"};
  return names;
}

bool is_boundary_family(const std::string& name) {
  const auto& names = boundary_families();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::function<double(const Vec2&)> boundary_function(const BoundarySpec& spec) {
  const double A = spec.amplitude;
  if (spec.family == "affine") {
    const Vec2 xi = spec.xi;
    return [A, xi](const Vec2& x) { return A * xi.dot(x); };
  }
  if (spec.family == "harmonic_quadratic") {
    return [A](const Vec2& x) { return A * (x.x() * x.x() - x.y() * x.y()); };
  }
  if (spec.family == "counterexample") {
    const double l = spec.lambda;
    return [A, l](const Vec2& x) { return A * (1.0 + x.y() * x.y() - l * x.x() * x.x()); };
  }
  if (spec.family == "bump") {
    const Vec2 c = spec.bump_center;
    const double w2 = spec.bump_width * spec.bump_width;
    return [A, c, w2](const Vec2& x) { return A * std::exp(-(x - c).squaredNorm() / w2); };
  }
  if (spec.family == "random") {
    require(spec.modes >= 1, ErrorKind::InvalidArgument, "random family needs >= 1 mode");
    // Σ a_jk cos(π(j x₁ + k x₂) + φ_jk) with |a_jk| ≤ 1/(1 + j² + k²), normalized
    // so the coefficient sum is at most one.
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    struct Mode {
      double j, k, a, phase;
    };
    std::vector<Mode> modes;
    double total = 0.0;
    for (int j = -spec.modes; j <= spec.modes; ++j) {
      for (int k = 0; k <= spec.modes; ++k) {
        if (k == 0 && j <= 0) continue;
        const double a = unit(rng) / (1.0 + j * j + k * k);
        const double phase = std::numbers::pi * unit(rng);
        modes.push_back({double(j), double(k), a, phase});
        total += std::abs(a);
      }
    }
    for (auto& m : modes) m.a /= total;
    const double offset = spec.offset;
    return [A, offset, modes](const Vec2& x) {
      double sum = offset;
      for (const auto& m : modes) {
        sum += m.a * std::cos(std::numbers::pi * (m.j * x.x() + m.k * x.y()) + m.phase);
      }
      return A * sum;
    };
  }
  fail(ErrorKind::InvalidArgument, "unknown boundary family '" + spec.family + "'");
}

}  // namespace pqlab
