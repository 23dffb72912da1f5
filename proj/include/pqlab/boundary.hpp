#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pqlab/types.hpp"

namespace pqlab {

/// Named analytic boundary-data families, defined on the whole plane so that
/// they can be mollified across the boundary.
struct BoundarySpec {
  std::string family = "affine";
  double amplitude = 1.0;
  Vec2 xi = Vec2(1.0, 0.0);               // affine: amplitude·ξ·x
  double lambda = 1.0;                    // counterexample: 1 + x₂² − Λx₁²
  Vec2 bump_center = Vec2(0.6, 0.3);      // bump: A·exp(−|x−c|²/w²)
  double bump_width = 0.7;
  int modes = 4;                          // random: Cartesian modes per direction
  double offset = 0.0;                    // random: constant term
  std::uint64_t seed = 1;
};

const std::vector<std::string>& boundary_families();
bool is_boundary_family(const std::string& name);

/// Throws InvalidArgument for an unknown family.
std::function<double(const Vec2&)> boundary_function(const BoundarySpec& spec);

}  // namespace pqlab
