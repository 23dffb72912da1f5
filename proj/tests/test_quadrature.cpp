#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pqlab/error.hpp"
#include "pqlab/quadrature.hpp"

using namespace pqlab;

TEST_SUITE("quadrature") {
  TEST_CASE("gauss_legendre integrates polynomials up to degree 2n-1") {
    for (int n : {1, 2, 5, 12, 40}) {
      const GaussRule rule = gauss_legendre(n);
      REQUIRE(rule.nodes.size() == n);
      CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
      for (int k = 0; k <= 2 * n - 1; ++k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += rule.weights(i) * std::pow(rule.nodes(i), k);
        const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
        CHECK(std::abs(sum - exact) < 1e-13);
      }
    }
  }

  TEST_CASE("bump mass matches the frozen reference") {
    CHECK(bump_mass() == doctest::Approx(oracle::kBumpMass).epsilon(1e-13));
  }

  TEST_CASE("mollifier has unit mass and support in the disc") {
    for (double delta : {1e-3, 0.05, 0.4, 1.0}) {
      const Mollifier phi(delta);
      CHECK(phi.size() == Mollifier::kDefaultRadialOrder * Mollifier::kDefaultAngularOrder);
      CHECK(std::abs(phi.mass() - 1.0) <= Mollifier::kMassTolerance);
      CHECK((phi.weights().array() >= 0.0).all());
      for (Index k = 0; k < phi.size(); ++k) CHECK(phi.nodes().row(k).norm() < delta);
    }
  }

  TEST_CASE("mollifier density is radial and vanishes outside the support") {
    const Mollifier phi(0.3);
    const Vec2 y(0.1, 0.05);
    const double angle = 0.7;
    const Vec2 rotated(std::cos(angle) * y(0) - std::sin(angle) * y(1),
                       std::sin(angle) * y(0) + std::cos(angle) * y(1));
    CHECK(phi.density(y) == doctest::Approx(phi.density(rotated)).epsilon(1e-14));
    CHECK(phi.density(Vec2(0.3, 0.0)) == 0.0);
    CHECK(phi.density(Vec2(0.25, 0.25)) == 0.0);
    const double peak = std::exp(-1.0) / (oracle::kBumpMass * 0.09);
    CHECK(phi.density(Vec2::Zero()) == doctest::Approx(peak).epsilon(1e-12));
  }

  TEST_CASE("second moment scales with delta squared") {
    for (double delta : {0.01, 0.2, 1.0}) {
      const Mollifier phi(delta);
      CHECK(phi.second_moment() ==
            doctest::Approx(oracle::kUnitSecondMoment * delta * delta).epsilon(1e-9));
    }
  }

  TEST_CASE("odd moments vanish by symmetry") {
    const Mollifier phi(0.5);
    const Eigen::Vector2d first = phi.nodes().transpose() * phi.weights();
    CHECK(first.norm() < 1e-15);
  }

  TEST_CASE("nonpositive delta is rejected") {
    CHECK_THROWS_AS(Mollifier(0.0), Error);
    CHECK_THROWS_AS(Mollifier(-1.0), Error);
  }
}
