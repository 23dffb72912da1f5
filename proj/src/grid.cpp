#include "pqlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "pqlab/error.hpp"
#include "pqlab/quadrature.hpp"

namespace pqlab {

Domain Domain::disc(const Vec2& center, double radius) {
  require(radius > 0.0, ErrorKind::InvalidArgument, "disc radius must be positive");
  return {Shape::Disc, center, radius};
}

Domain Domain::square(const Vec2& corner, double side) {
  require(side > 0.0, ErrorKind::InvalidArgument, "square side must be positive");
  return {Shape::Square, corner, side};
}

Vec2 Domain::center() const {
  return shape == Shape::Disc ? origin : Vec2(origin + Vec2::Constant(0.5 * size));
}

double Domain::radius() const { return shape == Shape::Disc ? size : 0.5 * size; }

std::array<Index, 3> Grid::triangle_nodes(Index t) const {
  const auto& c = cells_[t / 2];
  if (t % 2 == 0) return {c[0], c[1], c[3]};
  return {c[0], c[3], c[2]};
}

Vec2 Grid::cell_origin(Index c) const { return node(cells_[c][0]); }

Vec2 Grid::triangle_centroid(Index t) const {
  const Vec2 o = cell_origin(t / 2);
  return t % 2 == 0 ? Vec2(o + h_ * Vec2(2.0 / 3.0, 1.0 / 3.0))
                    : Vec2(o + h_ * Vec2(1.0 / 3.0, 2.0 / 3.0));
}

Index Grid::node_at(long i, long j) const {
  const long a = i - imin_, b = j - jmin_;
  if (a < 0 || b < 0 || a >= ni_ || b >= nj_) return -1;
  return node_lookup_[std::size_t(b * ni_ + a)];
}

Grid::Location Grid::locate(const Vec2& x) const {
  const Vec2 local = (x - lattice_origin_) / h_;
  const double fi = std::floor(local.x()), fj = std::floor(local.y());
  long ci = long(fi) - imin_, cj = long(fj) - jmin_;
  double s = local.x() - fi, t = local.y() - fj;
  auto lookup = [&](long a, long b) -> Index {
    if (a < 0 || b < 0 || a >= ni_ - 1 || b >= nj_ - 1) return -1;
    return cell_lookup_[std::size_t(b * (ni_ - 1) + a)];
  };
  Index cell = lookup(ci, cj);
  // Points on a lattice line may belong to the neighbouring cell only.
  if (cell < 0 && s == 0.0 && (cell = lookup(ci - 1, cj)) >= 0) s = 1.0;
  if (cell < 0 && t == 0.0 && (cell = lookup(ci, cj - 1)) >= 0) t = 1.0;
  if (cell < 0 && s == 0.0 && t == 0.0 && (cell = lookup(ci - 1, cj - 1)) >= 0) s = t = 1.0;
  return {cell, s, t};
}

GridPtr build_grid(const Domain& domain, int n) {
  require(n >= 8, ErrorKind::ResolutionTooCoarse, "grid resolution must be at least 8");
  return build_grid_with_spacing(domain, domain.extent() / n);
}

GridPtr build_grid_with_spacing(const Domain& domain, double h) {
  require(h > 0.0, ErrorKind::InvalidArgument, "grid spacing must be positive");
  auto grid = std::shared_ptr<Grid>(new Grid());
  grid->domain_ = domain;
  grid->h_ = h;

  long cmin, cmax;  // cell lattice range per direction, inclusive
  if (domain.shape == Domain::Shape::Disc) {
    const long m = long(std::ceil(domain.size / h)) + 1;
    grid->lattice_origin_ = domain.origin;
    cmin = -m;
    cmax = m - 1;
  } else {
    const long n = std::lround(domain.size / h);
    require(n >= 1 && std::abs(n * h - domain.size) <= 1e-9 * domain.size,
            ErrorKind::InvalidArgument, "square side must be a multiple of the spacing");
    grid->lattice_origin_ = domain.origin;
    cmin = 0;
    cmax = n - 1;
  }
  grid->imin_ = grid->jmin_ = cmin;
  grid->ni_ = grid->nj_ = cmax - cmin + 2;
  const long ncell_side = grid->ni_ - 1;

  std::vector<char> active(std::size_t(ncell_side * ncell_side), 0);
  for (long b = 0; b < ncell_side; ++b) {
    for (long a = 0; a < ncell_side; ++a) {
      bool on = true;
      if (domain.shape == Domain::Shape::Disc) {
        const Vec2 mid = h * Vec2(double(a + cmin) + 0.5, double(b + cmin) + 0.5);
        on = mid.norm() <= domain.size * (1.0 + 1e-12);
      }
      active[std::size_t(b * ncell_side + a)] = on;
    }
  }

  // Nodes used by at least one active cell, numbered row by row.
  std::vector<char> used(std::size_t(grid->ni_ * grid->nj_), 0);
  for (long b = 0; b < ncell_side; ++b) {
    for (long a = 0; a < ncell_side; ++a) {
      if (!active[std::size_t(b * ncell_side + a)]) continue;
      for (long db = 0; db < 2; ++db)
        for (long da = 0; da < 2; ++da) used[std::size_t((b + db) * grid->ni_ + a + da)] = 1;
    }
  }
  grid->node_lookup_.assign(used.size(), -1);
  std::vector<Vec2> positions;
  for (long b = 0; b < grid->nj_; ++b) {
    for (long a = 0; a < grid->ni_; ++a) {
      if (!used[std::size_t(b * grid->ni_ + a)]) continue;
      grid->node_lookup_[std::size_t(b * grid->ni_ + a)] = Index(positions.size());
      const long i = a + cmin, j = b + cmin;
      positions.push_back(grid->lattice_origin_ + h * Vec2(double(i), double(j)));
      grid->lattice_.push_back({i, j});
    }
  }
  require(positions.size() >= 9, ErrorKind::ResolutionTooCoarse, "grid has fewer than 9 nodes");
  grid->nodes_.resize(Index(positions.size()), 2);
  for (std::size_t k = 0; k < positions.size(); ++k) grid->nodes_.row(Index(k)) = positions[k];

  grid->cell_lookup_.assign(active.size(), -1);
  std::vector<int> cell_count(positions.size(), 0);
  for (long b = 0; b < ncell_side; ++b) {
    for (long a = 0; a < ncell_side; ++a) {
      if (!active[std::size_t(b * ncell_side + a)]) continue;
      auto id = [&](long da, long db) {
        return grid->node_lookup_[std::size_t((b + db) * grid->ni_ + a + da)];
      };
      const std::array<Index, 4> corners{id(0, 0), id(1, 0), id(0, 1), id(1, 1)};
      grid->cell_lookup_[std::size_t(b * ncell_side + a)] = Index(grid->cells_.size());
      grid->cells_.push_back(corners);
      for (Index c : corners) ++cell_count[std::size_t(c)];
    }
  }

  const Index nn = grid->num_nodes();
  grid->boundary_.assign(std::size_t(nn), 0);
  for (Index i = 0; i < nn; ++i) {
    const bool boundary = cell_count[std::size_t(i)] < 4;
    grid->boundary_[std::size_t(i)] = boundary;
    (boundary ? grid->boundary_list_ : grid->interior_list_).push_back(i);
  }

  grid->node_triangles_.assign(std::size_t(nn), {});
  for (Index t = 0; t < grid->num_triangles(); ++t) {
    for (Index v : grid->triangle_nodes(t)) grid->node_triangles_[std::size_t(v)].push_back(t);
  }
  return grid;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "field needs a grid");
  require(values_.size() == grid_->num_nodes(), ErrorKind::InvalidArgument,
          "field size does not match the grid");
  require(values_.allFinite(), ErrorKind::InvalidArgument, "field values must be finite");
}

ScalarField ScalarField::from_function(GridPtr grid, const std::function<double(const Vec2&)>& fn) {
  Eigen::VectorXd v(grid->num_nodes());
  for (Index i = 0; i < v.size(); ++i) v(i) = fn(grid->node(i));
  return ScalarField(std::move(grid), std::move(v));
}

ScalarField ScalarField::constant(GridPtr grid, double value) {
  const Index n = grid->num_nodes();
  return ScalarField(std::move(grid), Eigen::VectorXd::Constant(n, value));
}

double ScalarField::interpolate_in_cell(Index cell, double s, double t, Interpolation mode) const {
  const auto& c = grid_->cell_nodes(cell);
  if (mode == Interpolation::Quadratic) {
    const auto base = grid_->lattice_index(c[0]);
    const long ic = base[0] + (s >= 0.5 ? 1 : 0);
    const long jc = base[1] + (t >= 0.5 ? 1 : 0);
    const double xi = s - (s >= 0.5 ? 1.0 : 0.0);
    const double eta = t - (t >= 0.5 ? 1.0 : 0.0);
    const double lx[3] = {0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)};
    const double ly[3] = {0.5 * eta * (eta - 1.0), 1.0 - eta * eta, 0.5 * eta * (eta + 1.0)};
    double sum = 0.0;
    bool complete = true;
    for (int b = 0; b < 3 && complete; ++b) {
      for (int a = 0; a < 3; ++a) {
        const Index id = grid_->node_at(ic + a - 1, jc + b - 1);
        if (id < 0) {
          complete = false;
          break;
        }
        sum += lx[a] * ly[b] * values_(id);
      }
    }
    if (complete) return sum;
  }
  const double u00 = values_(c[0]), u10 = values_(c[1]), u01 = values_(c[2]), u11 = values_(c[3]);
  if (s >= t) return u00 + s * (u10 - u00) + t * (u11 - u10);
  return u00 + t * (u01 - u00) + s * (u11 - u01);
}

double ScalarField::interpolate(const Vec2& x, Interpolation mode) const {
  const Grid::Location loc = grid_->locate(x);
  if (loc.cell < 0) fail(ErrorKind::OutsideGrid, "point is not covered by the grid");
  return interpolate_in_cell(loc.cell, loc.s, loc.t, mode);
}

GradientField gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  const double h = g.spacing();
  const auto& v = u.values();
  GradientField out{u.grid_ptr(), Points2(g.num_triangles(), 2)};
  for (Index c = 0; c < g.num_cells(); ++c) {
    const auto& n = g.cell_nodes(c);
    const double u00 = v(n[0]), u10 = v(n[1]), u01 = v(n[2]), u11 = v(n[3]);
    out.values.row(2 * c) << (u10 - u00) / h, (u11 - u10) / h;
    out.values.row(2 * c + 1) << (u11 - u01) / h, (u01 - u00) / h;
  }
  return out;
}

Points2 nodal_gradient(const ScalarField& u) {
  const GradientField g = gradient(u);
  const Grid& grid = u.grid();
  Points2 out = Points2::Zero(grid.num_nodes(), 2);
  for (Index i = 0; i < grid.num_nodes(); ++i) {
    const auto& tris = grid.node_triangles()[std::size_t(i)];
    for (Index t : tris) out.row(i) += g.values.row(t);
    out.row(i) /= double(tris.size());
  }
  return out;
}

// ---------------------------------------------------------------------------

void for_each_sample(const Grid& grid, const Region& region, int subsamples,
                     const std::function<void(const QuadSample&)>& visit) {
  require(subsamples >= 1, ErrorKind::InvalidArgument, "need at least one sub-sample");
  const double h = grid.spacing();
  const double w = h * h / double(subsamples * subsamples);
  const bool everywhere = region.inner == 0.0 && std::isinf(region.outer);
  for (Index c = 0; c < grid.num_cells(); ++c) {
    const Vec2 o = grid.cell_origin(c);
    if (!everywhere) {
      // Skip cells entirely outside the annulus.
      const double d = (o + Vec2::Constant(0.5 * h) - region.center).norm();
      const double slack = h * std::numbers::sqrt2 * 0.5;
      if (d - slack > region.outer || d + slack < region.inner) continue;
    }
    for (int b = 0; b < subsamples; ++b) {
      const double t = (b + 0.5) / subsamples;
      for (int a = 0; a < subsamples; ++a) {
        const double s = (a + 0.5) / subsamples;
        const Vec2 x = o + h * Vec2(s, t);
        if (!everywhere && !region.contains(x)) continue;
        visit({x, c, 2 * c + (s >= t ? 0 : 1), s, t, w});
      }
    }
  }
}

double region_area(const Grid& grid, const Region& region, int subsamples) {
  double area = 0.0;
  for_each_sample(grid, region, subsamples, [&](const QuadSample& q) { area += q.weight; });
  return area;
}

namespace {

template <typename Fn>
double accumulate_field(const ScalarField& u, const Region& region, const QuadratureOptions& opts,
                        Fn&& integrand, double* area_out = nullptr) {
  double sum = 0.0, area = 0.0;
  for_each_sample(u.grid(), region, opts.subsamples, [&](const QuadSample& q) {
    sum += q.weight * integrand(u.interpolate_in_cell(q.cell, q.s, q.t, opts.interpolation));
    area += q.weight;
  });
  if (area_out) *area_out = area;
  return sum;
}

template <typename Fn>
double max_over_region(const ScalarField& u, const Region& region, const QuadratureOptions& opts,
                       Fn&& transform) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  const Grid& g = u.grid();
  for (Index i = 0; i < g.num_nodes(); ++i) {
    if (region.contains(g.node(i))) {
      best = std::max(best, transform(u(i)));
      any = true;
    }
  }
  for_each_sample(g, region, opts.subsamples, [&](const QuadSample& q) {
    best = std::max(best, transform(u.interpolate_in_cell(q.cell, q.s, q.t, opts.interpolation)));
    any = true;
  });
  require(any, ErrorKind::EmptySubdomain, "region contains no grid point");
  return best;
}

}  // namespace

double integrate(const ScalarField& u, const Region& region, const QuadratureOptions& opts) {
  return accumulate_field(u, region, opts, [](double v) { return v; });
}

double integrate_composed(const ScalarField& u, const Region& region,
                          const std::function<double(double)>& g, const QuadratureOptions& opts) {
  return accumulate_field(u, region, opts, g);
}

double lp_norm(const ScalarField& u, double p, const Region& region,
               const QuadratureOptions& opts) {
  require(p >= 1.0, ErrorKind::InvalidArgument, "lp_norm needs p >= 1");
  double area = 0.0;
  const double s = accumulate_field(
      u, region, opts, [p](double v) { return std::pow(std::abs(v), p); }, &area);
  require(area > 0.0, ErrorKind::EmptySubdomain, "region contains no quadrature point");
  return std::pow(s, 1.0 / p);
}

double linf_norm(const ScalarField& u, const Region& region, const QuadratureOptions& opts) {
  return max_over_region(u, region, opts, [](double v) { return std::abs(v); });
}

double mean_integral(const ScalarField& u, const Region& region, const QuadratureOptions& opts) {
  double area = 0.0;
  const double s = accumulate_field(u, region, opts, [](double v) { return v; }, &area);
  require(area > 0.0, ErrorKind::EmptySubdomain, "region contains no quadrature point");
  return s / area;
}

double sup_value(const ScalarField& u, const Region& region, const QuadratureOptions& opts) {
  return max_over_region(u, region, opts, [](double v) { return v; });
}

double integrate_cells(const Grid& grid, const Eigen::VectorXd& per_triangle, const Region& region,
                       int subsamples) {
  require(per_triangle.size() == grid.num_triangles(), ErrorKind::InvalidArgument,
          "per-triangle data does not match the grid");
  double sum = 0.0;
  for_each_sample(grid, region, subsamples,
                  [&](const QuadSample& q) { sum += q.weight * per_triangle(q.triangle); });
  return sum;
}

double gradient_lp_norm(const ScalarField& u, double p, const Region& region, int subsamples) {
  const GradientField g = gradient(u);
  const Eigen::VectorXd mag = g.values.rowwise().norm().array().pow(p).matrix();
  require(region_area(u.grid(), region, subsamples) > 0.0, ErrorKind::EmptySubdomain,
          "region contains no quadrature point");
  return std::pow(integrate_cells(u.grid(), mag, region, subsamples), 1.0 / p);
}

double gradient_linf_norm(const ScalarField& u, const Region& region) {
  const GradientField g = gradient(u);
  const Grid& grid = u.grid();
  double best = -1.0;
  for (Index t = 0; t < grid.num_triangles(); ++t) {
    if (region.contains(grid.triangle_centroid(t))) best = std::max(best, g.values.row(t).norm());
  }
  require(best >= 0.0, ErrorKind::EmptySubdomain, "region contains no triangle centroid");
  return best;
}

// ---------------------------------------------------------------------------

double circle_sup(const ScalarField& u, double r, Interpolation mode) {
  const Grid& g = u.grid();
  if (!(r > 0.0) || r > g.radius() * (1.0 + 1e-12)) {
    fail(ErrorKind::RadiusOutsideGrid, "circle radius outside the grid");
  }
  const int count =
      std::max(64, int(std::ceil(2.0 * std::numbers::pi * r / g.spacing())));
  const Vec2 c = g.center();
  double best = 0.0;
  for (int k = 0; k < count; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / count;
    const Grid::Location loc = g.locate(c + r * Vec2(std::cos(theta), std::sin(theta)));
    if (loc.cell < 0) fail(ErrorKind::RadiusOutsideGrid, "circle leaves the covered region");
    best = std::max(best, std::abs(u.interpolate_in_cell(loc.cell, loc.s, loc.t, mode)));
  }
  return best;
}

CircleMinimum min_circle_sup(const ScalarField& u, double rho, double sigma, int samples,
                             Interpolation mode) {
  require(samples >= 8, ErrorKind::InvalidArgument, "radius scan needs at least 8 samples");
  if (!(rho > 0.0 && rho < sigma && sigma <= u.grid().radius() * (1.0 + 1e-12))) {
    fail(ErrorKind::RadiusOutsideGrid, "radius range must satisfy 0 < rho < sigma <= R");
  }
  CircleMinimum best{rho, std::numeric_limits<double>::infinity()};
  for (int k = 0; k <= samples; ++k) {
    const double r = rho + (sigma - rho) * k / samples;
    const double v = circle_sup(u, r, mode);
    if (v < best.value) best = {r, v};
  }
  return best;
}

ScalarField mollify_field(const ScalarField& u, double eps, GridPtr target, Interpolation mode) {
  const Mollifier phi(eps);
  const auto& y = phi.nodes();
  const auto& w = phi.weights();
  const Grid& source = u.grid();
  Eigen::VectorXd out(target->num_nodes());
  for (Index i = 0; i < target->num_nodes(); ++i) {
    const Vec2 x = target->node(i);
    double sum = 0.0;
    for (Index k = 0; k < w.size(); ++k) {
      const Grid::Location loc = source.locate(x - y.row(k).transpose());
      if (loc.cell < 0) {
        fail(ErrorKind::InsufficientMargin,
             "source field does not cover the eps-neighbourhood of the target grid");
      }
      sum += w(k) * u.interpolate_in_cell(loc.cell, loc.s, loc.t, mode);
    }
    out(i) = sum;
  }
  return ScalarField(std::move(target), std::move(out));
}

// ---------------------------------------------------------------------------

EllipticityRange ellipticity_range(const std::vector<Mat2>& matrices) {
  EllipticityRange r{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity(), 0.0};
  for (const Mat2& a : matrices) {
    r.asymmetry = std::max(r.asymmetry, std::abs(a(0, 1) - a(1, 0)));
    Eigen::SelfAdjointEigenSolver<Mat2> eig(a, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = std::min(r.min_eigenvalue, eig.eigenvalues()(0));
    r.max_eigenvalue = std::max(r.max_eigenvalue, eig.eigenvalues()(1));
  }
  return r;
}

CoefficientField::CoefficientField(GridPtr grid, std::vector<Mat2> matrices, double nu,
                                   double lambda_up, double tolerance)
    : grid_(std::move(grid)), matrices_(std::move(matrices)), nu_(nu), lambda_up_(lambda_up) {
  require(grid_ != nullptr && Index(matrices_.size()) == grid_->num_nodes(),
          ErrorKind::InvalidArgument, "coefficient field does not match the grid");
  require(nu > 0.0 && lambda_up >= nu, ErrorKind::InvalidArgument,
          "ellipticity bounds must satisfy 0 < nu <= lambda");
  const EllipticityRange r = ellipticity_range(matrices_);
  if (r.asymmetry > tolerance * lambda_up) fail(ErrorKind::NotElliptic, "matrix not symmetric");
  if (r.min_eigenvalue < nu * (1.0 - tolerance) ||
      r.max_eigenvalue > lambda_up * (1.0 + tolerance)) {
    fail(ErrorKind::NotElliptic, "eigenvalues [" + std::to_string(r.min_eigenvalue) + ", " +
                                     std::to_string(r.max_eigenvalue) + "] outside [" +
                                     std::to_string(nu) + ", " + std::to_string(lambda_up) + "]");
  }
  diagonal_ = std::all_of(matrices_.begin(), matrices_.end(),
                          [](const Mat2& a) { return a(0, 1) == 0.0 && a(1, 0) == 0.0; });
}

CoefficientField CoefficientField::constant(GridPtr grid, const Mat2& a, double nu,
                                            double lambda_up) {
  const Index n = grid->num_nodes();
  return CoefficientField(std::move(grid), std::vector<Mat2>(std::size_t(n), a), nu, lambda_up);
}

CoefficientField CoefficientField::diagonal(GridPtr grid, const Eigen::VectorXd& a11,
                                            const Eigen::VectorXd& a22, double nu,
                                            double lambda_up) {
  std::vector<Mat2> m(std::size_t(grid->num_nodes()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] << a11(Index(i)), 0.0, 0.0, a22(Index(i));
  }
  return CoefficientField(std::move(grid), std::move(m), nu, lambda_up);
}

}  // namespace pqlab
