#pragma once

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "pqlab/types.hpp"

namespace pqlab {

/// Analytic domain discretized by a Grid. For a disc `origin` is the center and
/// `size` the radius; for a square `origin` is the lower-left corner and `size`
/// the side length.
struct Domain {
  enum class Shape { Disc, Square };

  Shape shape = Shape::Disc;
  Vec2 origin = Vec2::Zero();
  double size = 1.0;

  static Domain disc(const Vec2& center, double radius);
  static Domain unit_disc() { return disc(Vec2::Zero(), 1.0); }
  static Domain square(const Vec2& corner, double side);
  static Domain unit_square() { return square(Vec2::Zero(), 1.0); }

  Vec2 center() const;
  /// Disc radius, or half the side of a square (radius of the inscribed disc).
  double radius() const;
  /// Length divided by the resolution to obtain the spacing.
  double extent() const { return shape == Shape::Disc ? 2.0 * size : size; }
};

/// Annulus {inner <= |x - center| <= outer}; discs have inner = 0.
struct Region {
  Vec2 center = Vec2::Zero();
  double inner = 0.0;
  double outer = std::numeric_limits<double>::infinity();

  static Region whole() { return {}; }
  static Region disc(const Vec2& c, double r) { return {c, 0.0, r}; }
  static Region annulus(const Vec2& c, double r_in, double r_out) { return {c, r_in, r_out}; }

  bool contains(const Vec2& x) const {
    const double d2 = (x - center).squaredNorm();
    return d2 >= inner * inner && d2 <= outer * outer;
  }
};

/// Structured lattice over a disc or square. Cells are the lattice squares
/// whose center lies in the domain; each cell is split along its (0,0)-(1,1)
/// diagonal into a lower triangle (n00, n10, n11) and an upper triangle
/// (n00, n11, n01) for piecewise-linear interpolation. A node is interior iff
/// all four cells around it are active.
class Grid {
 public:
  const Domain& domain() const { return domain_; }
  double spacing() const { return h_; }
  Vec2 center() const { return domain_.center(); }
  double radius() const { return domain_.radius(); }

  Index num_nodes() const { return nodes_.rows(); }
  Index num_cells() const { return Index(cells_.size()); }
  Index num_triangles() const { return 2 * num_cells(); }
  double triangle_area() const { return 0.5 * h_ * h_; }

  const Points2& nodes() const { return nodes_; }
  Vec2 node(Index i) const { return nodes_.row(i).transpose(); }
  bool is_boundary(Index i) const { return boundary_[i] != 0; }
  const std::vector<Index>& boundary_nodes() const { return boundary_list_; }
  const std::vector<Index>& interior_nodes() const { return interior_list_; }

  /// Corner nodes (n00, n10, n01, n11) of a cell.
  const std::array<Index, 4>& cell_nodes(Index c) const { return cells_[c]; }
  std::array<Index, 3> triangle_nodes(Index t) const;
  Vec2 cell_origin(Index c) const;
  Vec2 triangle_centroid(Index t) const;

  /// Node id at lattice coordinates, -1 when absent.
  Index node_at(long i, long j) const;
  std::array<long, 2> lattice_index(Index node) const { return lattice_[node]; }

  /// Active cell containing x together with local coordinates in [0,1]², or
  /// cell -1 when x is not covered.
  struct Location {
    Index cell = -1;
    double s = 0.0;
    double t = 0.0;
  };
  Location locate(const Vec2& x) const;

  /// Triangles adjacent to every node (for nodal averages).
  const std::vector<std::vector<Index>>& node_triangles() const { return node_triangles_; }

 private:
  friend std::shared_ptr<const Grid> build_grid_with_spacing(const Domain& domain, double h);

  Domain domain_;
  double h_ = 0.0;
  Vec2 lattice_origin_ = Vec2::Zero();
  long imin_ = 0, jmin_ = 0, ni_ = 0, nj_ = 0;  // node lattice box
  Points2 nodes_;
  std::vector<std::array<long, 2>> lattice_;
  std::vector<Index> node_lookup_;  // ni_ * nj_ box, -1 for absent
  std::vector<Index> cell_lookup_;  // (ni_-1) * (nj_-1) box, -1 for inactive
  std::vector<std::array<Index, 4>> cells_;
  std::vector<char> boundary_;
  std::vector<Index> boundary_list_;
  std::vector<Index> interior_list_;
  std::vector<std::vector<Index>> node_triangles_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Grid with spacing extent/n (h = 2R/n for a disc of radius R, side/n for a
/// square). Throws ResolutionTooCoarse for n < 8.
GridPtr build_grid(const Domain& domain, int n);

/// Grid with an explicit spacing; the lattice is anchored at the disc center
/// or the square corner.
GridPtr build_grid_with_spacing(const Domain& domain, double h);

enum class Interpolation {
  Linear,     // piecewise linear on the triangles
  Quadratic,  // biquadratic on the 3×3 node patch around the nearest node
};

struct QuadratureOptions {
  int subsamples = 4;  // per direction and cell
  Interpolation interpolation = Interpolation::Linear;
};

/// Nodal values on a grid.
class ScalarField {
 public:
  ScalarField(GridPtr grid, Eigen::VectorXd values);

  static ScalarField from_function(GridPtr grid, const std::function<double(const Vec2&)>& fn);
  static ScalarField constant(GridPtr grid, double value);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator()(Index node) const { return values_(node); }

  /// Value at x; throws OutsideGrid when x is not covered by an active cell.
  double interpolate(const Vec2& x, Interpolation mode = Interpolation::Linear) const;
  double interpolate_in_cell(Index cell, double s, double t, Interpolation mode) const;

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

/// Constant gradient of the piecewise-linear interpolant on every triangle.
struct GradientField {
  GridPtr grid;
  Points2 values;  // num_triangles × 2
};

GradientField gradient(const ScalarField& u);

/// Area-weighted average of the triangle gradients around each node.
Points2 nodal_gradient(const ScalarField& u);

/// One quadrature point: position, owning cell/triangle, local coordinates.
struct QuadSample {
  Vec2 x;
  Index cell;
  Index triangle;
  double s;
  double t;
  double weight;
};

/// Visits the midpoint sub-samples of every active cell that fall in `region`.
void for_each_sample(const Grid& grid, const Region& region, int subsamples,
                     const std::function<void(const QuadSample&)>& visit);

/// Measure of region ∩ grid by sub-sampling.
double region_area(const Grid& grid, const Region& region, int subsamples = 4);

double integrate(const ScalarField& u, const Region& region, const QuadratureOptions& opts = {});
double lp_norm(const ScalarField& u, double p, const Region& region,
               const QuadratureOptions& opts = {});
/// ∫ g(u) with g applied to the interpolated values at each quadrature point.
double integrate_composed(const ScalarField& u, const Region& region,
                          const std::function<double(double)>& g,
                          const QuadratureOptions& opts = {});
/// max |u| over the nodes and quadrature points inside the region.
double linf_norm(const ScalarField& u, const Region& region, const QuadratureOptions& opts = {});
/// ∫ u / |region ∩ grid|; throws EmptySubdomain when no quadrature point lies inside.
double mean_integral(const ScalarField& u, const Region& region,
                     const QuadratureOptions& opts = {});
/// max u (signed) over the nodes and quadrature points inside the region.
double sup_value(const ScalarField& u, const Region& region, const QuadratureOptions& opts = {});

/// ∫ over the region of a per-triangle quantity.
double integrate_cells(const Grid& grid, const Eigen::VectorXd& per_triangle, const Region& region,
                       int subsamples = 4);
/// (∫ |∇u|^p)^{1/p}.
double gradient_lp_norm(const ScalarField& u, double p, const Region& region, int subsamples = 4);
/// max |∇u| over triangles whose centroid lies in the region.
double gradient_linf_norm(const ScalarField& u, const Region& region);

/// max |u| over max(64, ⌈2πr/h⌉) equally spaced points of the circle of
/// radius r around the grid center. Throws RadiusOutsideGrid when the circle
/// leaves the grid.
double circle_sup(const ScalarField& u, double r, Interpolation mode = Interpolation::Linear);

struct CircleMinimum {
  double radius = 0.0;
  double value = 0.0;
};

/// Scans `samples` + 1 equally spaced radii in [rho, sigma] and returns the
/// smallest circle_sup.
CircleMinimum min_circle_sup(const ScalarField& u, double rho, double sigma, int samples = 64,
                             Interpolation mode = Interpolation::Linear);

/// ū_ε = u ∗ φ_ε sampled at the nodes of `target`. The source field must cover
/// every target node enlarged by ε; otherwise InsufficientMargin is thrown.
ScalarField mollify_field(const ScalarField& u, double eps, GridPtr target,
                          Interpolation mode = Interpolation::Linear);

/// Per-node symmetric 2×2 coefficient matrices with eigenvalues in [nu, lambda_up].
class CoefficientField {
 public:
  /// Throws NotElliptic when a matrix is not symmetric or has an eigenvalue
  /// outside [nu, lambda_up] (relative slack `tolerance`).
  CoefficientField(GridPtr grid, std::vector<Mat2> matrices, double nu, double lambda_up,
                   double tolerance = 1e-12);

  static CoefficientField constant(GridPtr grid, const Mat2& a, double nu, double lambda_up);
  static CoefficientField diagonal(GridPtr grid, const Eigen::VectorXd& a11,
                                   const Eigen::VectorXd& a22, double nu, double lambda_up);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Mat2& at(Index node) const { return matrices_[node]; }
  double nu() const { return nu_; }
  double lambda_up() const { return lambda_up_; }
  bool is_diagonal() const { return diagonal_; }

 private:
  GridPtr grid_;
  std::vector<Mat2> matrices_;
  double nu_;
  double lambda_up_;
  bool diagonal_;
};

struct EllipticityRange {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double asymmetry = 0.0;
};

EllipticityRange ellipticity_range(const std::vector<Mat2>& matrices);

}  // namespace pqlab
