#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pqlab/error.hpp"
#include "pqlab/grid.hpp"
#include "pqlab/integrand.hpp"
#include "pqlab/quadrature.hpp"

using namespace pqlab;
using std::numbers::pi;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

double affine(const Vec2& x) { return 0.3 - 1.7 * x.x() + 2.2 * x.y(); }
double quadratic(const Vec2& x) {
  return 1.0 + x.x() - 0.5 * x.y() + 2.0 * x.x() * x.x() - 0.7 * x.x() * x.y() + 0.4 * x.y() * x.y();
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("unit square lattice counts") {
    const GridPtr g = build_grid(Domain::unit_square(), 16);
    CHECK(g->spacing() == doctest::Approx(1.0 / 16));
    CHECK(g->num_nodes() == 17 * 17);
    CHECK(g->num_cells() == 256);
    CHECK(g->num_triangles() == 512);
    CHECK(g->boundary_nodes().size() == 64);
    CHECK(g->interior_nodes().size() == 15 * 15);
    CHECK(region_area(*g, Region::whole()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g->radius() == doctest::Approx(0.5));
    CHECK((g->center() - Vec2(0.5, 0.5)).norm() < 1e-15);
  }

  TEST_CASE("disc lattice: active cells, boundary classification, area") {
    double previous = INFINITY;
    for (int n : {16, 32, 64, 128}) {
      const GridPtr g = build_grid(Domain::unit_disc(), n);
      const double h = g->spacing();
      CHECK(h == doctest::Approx(2.0 / n));
      CHECK(g->boundary_nodes().size() + g->interior_nodes().size() == std::size_t(g->num_nodes()));
      for (Index c = 0; c < g->num_cells(); ++c) {
        const Vec2 mid = g->cell_origin(c) + Vec2(h / 2, h / 2);
        CHECK(mid.norm() <= 1.0);
      }
      for (Index i = 0; i < g->num_nodes(); ++i) CHECK(g->node(i).norm() <= 1.0 + h);
      for (Index i : g->interior_nodes()) {
        CHECK(g->node_triangles()[std::size_t(i)].size() == 6);
      }
      const double error = std::abs(region_area(*g, Region::whole()) - pi);
      CHECK(error < 4.0 * h);
      previous = error;
    }
    CHECK(previous < 0.02);
  }

  TEST_CASE("resolution below eight is rejected") {
    CHECK(kind_of([] { build_grid(Domain::unit_disc(), 4); }) == ErrorKind::ResolutionTooCoarse);
    CHECK_NOTHROW(build_grid(Domain::unit_disc(), 8));
  }

  TEST_CASE("triangle split follows the cell diagonal") {
    const GridPtr g = build_grid(Domain::unit_square(), 8);
    const auto& n = g->cell_nodes(0);
    const auto lower = g->triangle_nodes(0);
    const auto upper = g->triangle_nodes(1);
    CHECK(lower == std::array<Index, 3>{n[0], n[1], n[3]});
    CHECK(upper == std::array<Index, 3>{n[0], n[3], n[2]});
    const Vec2 c = g->triangle_centroid(0);
    CHECK((c - Vec2(2.0 / 3, 1.0 / 3) * g->spacing()).norm() < 1e-15);
    CHECK(g->node_at(0, 0) >= 0);
    CHECK(g->node_at(-1, 0) == -1);
  }

  TEST_CASE("locate covers lattice lines and the outer edge") {
    const GridPtr g = build_grid(Domain::unit_square(), 8);
    for (const Vec2& x : {Vec2(1.0, 1.0), Vec2(1.0, 0.3), Vec2(0.25, 1.0), Vec2(0.0, 0.0)}) {
      const Grid::Location loc = g->locate(x);
      REQUIRE(loc.cell >= 0);
      CHECK((g->cell_origin(loc.cell) + g->spacing() * Vec2(loc.s, loc.t) - x).norm() < 1e-14);
    }
    CHECK(g->locate(Vec2(1.01, 0.5)).cell == -1);
  }

  TEST_CASE("linear interpolation and gradients reproduce affine fields") {
    const GridPtr g = build_grid(Domain::unit_disc(), 24);
    const ScalarField u = ScalarField::from_function(g, affine);
    const GradientField du = gradient(u);
    for (Index t = 0; t < g->num_triangles(); ++t) {
      CHECK((du.values.row(t).transpose() - Vec2(-1.7, 2.2)).norm() < 1e-12);
    }
    const Points2 nodal = nodal_gradient(u);
    for (Index i = 0; i < g->num_nodes(); ++i) {
      CHECK((nodal.row(i).transpose() - Vec2(-1.7, 2.2)).norm() < 1e-12);
    }
    for (const Vec2& x : {Vec2(0.1, 0.2), Vec2(-0.5, 0.31), Vec2(0.0, -0.77)}) {
      CHECK(u.interpolate(x) == doctest::Approx(affine(x)).epsilon(1e-13));
    }
    CHECK(kind_of([&] { u.interpolate(Vec2(1.5, 0.0)); }) == ErrorKind::OutsideGrid);
  }

  TEST_CASE("biquadratic interpolation reproduces quadratics") {
    const GridPtr g = build_grid(Domain::unit_disc(), 32);
    const ScalarField u = ScalarField::from_function(g, quadratic);
    for (const Vec2& x : {Vec2(0.013, 0.2), Vec2(-0.5, 0.31), Vec2(0.33, -0.61)}) {
      CHECK(std::abs(u.interpolate(x, Interpolation::Quadratic) - quadratic(x)) < 1e-12);
      CHECK(std::abs(u.interpolate(x, Interpolation::Linear) - quadratic(x)) <
            4.0 * g->spacing() * g->spacing());
    }
  }

  TEST_CASE("integrals on the square are exact for affine integrands") {
    const GridPtr g = build_grid(Domain::unit_square(), 16);
    const ScalarField u = ScalarField::from_function(g, affine);
    CHECK(integrate(u, Region::whole()) == doctest::Approx(0.3 - 0.85 + 1.1).epsilon(1e-13));
    CHECK(mean_integral(u, Region::whole()) == doctest::Approx(0.55).epsilon(1e-13));
    const ScalarField one = ScalarField::constant(g, 1.0);
    CHECK(lp_norm(one, 3.0, Region::whole()) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gradient_lp_norm(u, 2.0, Region::whole()) ==
          doctest::Approx(std::hypot(1.7, 2.2)).epsilon(1e-13));
    CHECK(gradient_linf_norm(u, Region::whole()) ==
          doctest::Approx(std::hypot(1.7, 2.2)).epsilon(1e-13));
  }

  TEST_CASE("disc integrals converge to adaptive-quadrature references") {
    // ∫_{B1} (1 − |x|²)² = 2π ∫ r(1 − r²)² dr.
    const double exact = 2.0 * pi * oracle::adaptive([](double r) {
      return r * std::pow(1.0 - r * r, 2);
    }, 0.0, 1.0);
    CHECK(exact == doctest::Approx(pi / 3).epsilon(1e-13));
    double previous = INFINITY;
    for (int n : {32, 64, 128}) {
      const GridPtr g = build_grid(Domain::unit_disc(), n);
      const ScalarField u =
          ScalarField::from_function(g, [](const Vec2& x) { return 1.0 - x.squaredNorm(); });
      const double error = std::abs(integrate_composed(u, Region::whole(), [](double v) {
        return v * v;
      }) - exact);
      CHECK(error < previous);
      previous = error;
    }
    CHECK(previous < 1e-3);
  }

  TEST_CASE("annulus restriction and empty regions") {
    const GridPtr g = build_grid(Domain::unit_disc(), 128);
    const ScalarField one = ScalarField::constant(g, 1.0);
    const Region ring = Region::annulus(Vec2::Zero(), 0.25, 0.5);
    CHECK(integrate(one, ring) == doctest::Approx(pi * (0.25 - 0.0625)).epsilon(1e-3));
    CHECK(kind_of([&] { mean_integral(one, Region::disc(Vec2(5.0, 5.0), 0.1)); }) ==
          ErrorKind::EmptySubdomain);
  }

  TEST_CASE("sup and linf norms") {
    const GridPtr g = build_grid(Domain::unit_disc(), 64);
    const ScalarField u = ScalarField::from_function(g, [](const Vec2& x) { return x.x() - 0.2; });
    CHECK(sup_value(u, Region::disc(Vec2::Zero(), 0.5)) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(linf_norm(u, Region::disc(Vec2::Zero(), 0.5)) == doctest::Approx(0.7).epsilon(1e-12));
  }

  TEST_CASE("circle sup and the radius scan") {
    const GridPtr g = build_grid(Domain::unit_disc(), 64);
    const ScalarField u = ScalarField::from_function(g, [](const Vec2& x) { return x.x(); });
    CHECK(circle_sup(u, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(kind_of([&] { circle_sup(u, 1.5); }) == ErrorKind::RadiusOutsideGrid);
    const CircleMinimum m = min_circle_sup(u, 0.25, 0.75);
    CHECK(m.radius == doctest::Approx(0.25));
    CHECK(m.value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(kind_of([&] { min_circle_sup(u, 0.5, 0.25); }) == ErrorKind::RadiusOutsideGrid);
  }

  TEST_CASE("mollification preserves affine fields and needs a margin") {
    const GridPtr source = build_grid(Domain::unit_disc(), 64);
    const GridPtr target = build_grid_with_spacing(Domain::disc(Vec2::Zero(), 0.5), source->spacing());
    const ScalarField u = ScalarField::from_function(source, affine);
    const ScalarField v = mollify_field(u, 0.1, target);
    // The rule has zero first moment, so only its mass defect remains.
    const double mass = Mollifier(0.1).mass();
    for (Index i = 0; i < target->num_nodes(); ++i) {
      CHECK(std::abs(v(i) - mass * affine(target->node(i))) < 1e-13);
    }
    CHECK(kind_of([&] { mollify_field(u, 0.1, source); }) == ErrorKind::InsufficientMargin);
  }

  TEST_CASE("mollification adds the second moment to a quadratic") {
    const GridPtr source = build_grid(Domain::unit_disc(), 64);
    const GridPtr target = build_grid_with_spacing(Domain::disc(Vec2::Zero(), 0.5), source->spacing());
    const ScalarField u =
        ScalarField::from_function(source, [](const Vec2& x) { return x.squaredNorm(); });
    const double eps = 0.2;
    const ScalarField v = mollify_field(u, eps, target, Interpolation::Quadratic);
    const Mollifier phi(eps);
    const double m2 = oracle::kUnitSecondMoment * eps * eps;
    for (Index i = 0; i < target->num_nodes(); ++i) {
      CHECK(std::abs(v(i) - phi.mass() * target->node(i).squaredNorm() - m2) < 1e-9);
    }
  }

  TEST_CASE("coefficient fields enforce ellipticity") {
    const GridPtr g = build_grid(Domain::unit_square(), 8);
    Mat2 a;
    a << 2.0, 0.5, 0.5, 1.0;
    CHECK_NOTHROW(CoefficientField::constant(g, a, 0.5, 3.0));
    CHECK_FALSE(CoefficientField::constant(g, a, 0.5, 3.0).is_diagonal());
    CHECK(kind_of([&] { CoefficientField::constant(g, a, 1.0, 3.0); }) == ErrorKind::NotElliptic);
    Mat2 asym = a;
    asym(0, 1) = 0.0;
    CHECK(kind_of([&] { CoefficientField::constant(g, asym, 0.5, 3.0); }) ==
          ErrorKind::NotElliptic);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g->num_nodes());
    const CoefficientField d = CoefficientField::diagonal(g, ones, 4.0 * ones, 1.0, 4.0);
    CHECK(d.is_diagonal());
    CHECK(d.at(3)(1, 1) == 4.0);

    const EllipticityRange r = ellipticity_range({a, Mat2::Identity()});
    CHECK(r.min_eigenvalue == doctest::Approx(1.5 - std::sqrt(0.5)).epsilon(1e-14));
    CHECK(r.max_eigenvalue == doctest::Approx(1.5 + std::sqrt(0.5)).epsilon(1e-14));
    CHECK(r.asymmetry == 0.0);
  }

  TEST_CASE("shifted disc keeps every node near the analytic boundary") {
    const GridPtr g = build_grid(Domain::disc(Vec2(1.0, 0.0), 2.0), 32);
    const double h = g->spacing();
    for (Index i = 0; i < g->num_nodes(); ++i) CHECK((g->node(i) - Vec2(1.0, 0.0)).norm() <= 2.0 + h);
    const double count_ratio = double(g->num_nodes()) / (pi * 4.0 / (h * h));
    CHECK(std::abs(count_ratio - 1.0) < 0.15);
    const GridPtr unit = build_grid(Domain::unit_disc(), 64);
    CHECK(std::abs(double(unit->num_nodes()) / (pi / std::pow(unit->spacing(), 2)) - 1.0) < 0.05);
  }

  TEST_CASE("gradient of constants vanishes and smooth gradients are first order") {
    const GridPtr g = build_grid(Domain::unit_disc(), 64);
    CHECK(gradient(ScalarField::constant(g, 3.0)).values.cwiseAbs().maxCoeff() == 0.0);
    const ScalarField u = ScalarField::from_function(g, [](const Vec2& x) { return x.x() * x.x(); });
    const GradientField du = gradient(u);
    double worst = 0.0;
    for (Index t = 0; t < g->num_triangles(); ++t) {
      const Vec2 c = g->triangle_centroid(t);
      worst = std::max(worst, (du.values.row(t).transpose() - Vec2(2.0 * c.x(), 0.0)).norm());
    }
    CHECK(worst <= 2.0 * g->spacing());
  }

  TEST_CASE("constant field norms on the unit disc") {
    const GridPtr g = build_grid(Domain::unit_disc(), 128);
    const ScalarField u = ScalarField::constant(g, -2.0);
    const double area = region_area(*g, Region::whole());
    CHECK(lp_norm(u, 2.0, Region::whole()) == doctest::Approx(2.0 * std::sqrt(area)).epsilon(1e-13));
    CHECK(std::abs(lp_norm(u, 2.0, Region::whole()) - 2.0 * std::sqrt(pi)) < 0.01);
    CHECK(mean_integral(u, Region::whole()) == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(linf_norm(u, Region::whole()) == 2.0);
  }

  TEST_CASE("second moment of x1 on the square") {
    const GridPtr g = build_grid(Domain::unit_square(), 128);
    const ScalarField u = ScalarField::from_function(g, [](const Vec2& x) { return x.x(); });
    CHECK(std::abs(std::pow(lp_norm(u, 2.0, Region::whole()), 2) - 1.0 / 3.0) < 1e-4);
  }

  TEST_CASE("positive part of the anisotropic example stays under its bound") {
    const GridPtr g = build_grid(Domain::unit_disc(), 256);
    const double lambda = 100.0;
    const ScalarField v = ScalarField::from_function(g, [&](const Vec2& x) {
      return 1.0 + x.y() * x.y() - lambda * x.x() * x.x();
    });
    const double sq = integrate_composed(v, Region::whole(), [](double t) {
      return t > 0.0 ? t * t : 0.0;
    });
    CHECK(sq == doctest::Approx(oracle::kPositivePartL2SqLambda100).epsilon(5e-3));
    CHECK(sq <= 32.0 / 15.0 * std::pow(2.0, 2.5) / std::sqrt(lambda));
  }

  TEST_CASE("Hoelder ordering of mean power and sup") {
    const GridPtr g = build_grid(Domain::unit_disc(), 48);
    const ScalarField u = ScalarField::from_function(g, [](const Vec2& x) {
      return std::sin(3.0 * x.x()) * std::cos(2.0 * x.y()) + 0.3 * x.y();
    });
    for (double p : {1.0, 2.0, 5.0}) {
      const Region b = Region::disc(Vec2(0.1, 0.0), 0.6);
      const double mean_power = integrate_composed(u, b, [p](double t) {
        return std::pow(std::abs(t), p);
      }) / region_area(*g, b);
      CHECK(std::pow(mean_power, 1.0 / p) <= linf_norm(u, b) + 1e-14);
    }
  }

  TEST_CASE("circle sup of constants and radial fields") {
    const GridPtr g = build_grid(Domain::unit_disc(), 64);
    const ScalarField five = ScalarField::constant(g, 5.0);
    CHECK(circle_sup(five, 0.3) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(min_circle_sup(five, 0.2, 0.8).value == doctest::Approx(5.0).epsilon(1e-14));
    const ScalarField r2 = ScalarField::from_function(g, [](const Vec2& x) { return x.squaredNorm(); });
    CHECK(std::abs(circle_sup(r2, 0.5) - 0.25) < g->spacing() * g->spacing());
    const CircleMinimum m = min_circle_sup(r2, 0.25, 0.5, 32);
    CHECK(m.radius == doctest::Approx(0.25));
    CHECK(std::abs(m.value - 0.0625) < g->spacing() * g->spacing());
  }

  TEST_CASE("circle sup agrees with the sup over a thin annulus") {
    const GridPtr g = build_grid(Domain::unit_disc(), 96);
    const double h = g->spacing();
    const ScalarField u = ScalarField::from_function(g, [](const Vec2& x) {
      return std::cos(2.0 * x.x() - x.y()) + x.x() * x.y();
    });
    const double r = 0.6;
    const double ring = linf_norm(u, Region::annulus(Vec2::Zero(), r - h, r + h));
    // |∇u| ≤ 3 on the disc, so values across a width of h differ by at most 3h.
    CHECK(std::abs(circle_sup(u, r) - ring) <= 3.0 * h);
  }

  TEST_CASE("mollification commutes with adding affine functions") {
    const GridPtr source = build_grid(Domain::unit_disc(), 48);
    const GridPtr target = build_grid_with_spacing(Domain::disc(Vec2::Zero(), 0.6), source->spacing());
    auto wave = [](const Vec2& x) { return std::sin(4.0 * x.x()) * x.y(); };
    const ScalarField u = ScalarField::from_function(source, wave);
    const ScalarField w =
        ScalarField::from_function(source, [&](const Vec2& x) { return wave(x) + affine(x); });
    const ScalarField mu = mollify_field(u, 0.15, target);
    const ScalarField mw = mollify_field(w, 0.15, target);
    const double mass = Mollifier(0.15).mass();
    for (Index i = 0; i < target->num_nodes(); ++i) {
      CHECK(std::abs(mw(i) - mu(i) - mass * affine(target->node(i))) < 1e-13);
    }
  }
}

TEST_SUITE("grid") {
  TEST_CASE("mollified gradients satisfy the Jensen inequality") {
    const double eps = 0.1;
    const GridPtr target = build_grid(Domain::unit_disc(), 64);
    const double h = target->spacing();
    const GridPtr source = build_grid_with_spacing(Domain::disc(Vec2::Zero(), 1.0 + eps + 2.0 * h), h);
    const ScalarField u =
        ScalarField::from_function(source, [](const Vec2& x) { return std::pow(x.x(), 3); });
    const ScalarField ub = mollify_field(u, eps, target);
    const Integrand F = make_model_pq(2.0, 4.0, 1.0, 1.0, 1.0);
    auto density = [&](const ScalarField& w) {
      const GradientField dw = gradient(w);
      Eigen::VectorXd per(dw.values.rows());
      for (Index t = 0; t < per.size(); ++t) per(t) = F.value(dw.values.row(t).transpose());
      return per;
    };
    const double lhs = integrate_cells(*target, density(ub), Region::disc(Vec2::Zero(), 1.0));
    const double rhs = integrate_cells(*source, density(u), Region::disc(Vec2::Zero(), 1.0 + eps));
    CHECK(lhs <= rhs + 1e-6);
  }
}
