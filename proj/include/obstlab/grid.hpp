#ifndef OBSTLAB_GRID_HPP
#define OBSTLAB_GRID_HPP

#include "obstlab/measure.hpp"

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace obstlab {

using SparseMatrix = Eigen::SparseMatrix<double>;
/// Values at the interior nodes of a Grid; boundary values are zero.
using NodalFunction = Eigen::VectorXd;
using Index = Eigen::Index;

struct Rectangle {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  Box box() const { return Box(2, Point(x0, y0, 0.0), Point(x1, y1, 0.0)); }
};

/// Uniform square-cell grid on a rectangle, every cell cut by its
/// lower-left to upper-right diagonal. Nodes are numbered row-major;
/// interior nodes get their own compact row-major numbering.
class Grid {
public:
  struct Location {
    std::array<Index, 3> nodes; // full node numbers
    Eigen::Vector3d weights;    // barycentric coordinates
    int element;
  };

  Grid(Rectangle rect, int nx, int ny);

  const Rectangle& rect() const { return rect_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  /// Cell count along the shorter side.
  int n() const { return std::min(nx_, ny_); }

  Index node_count() const { return Index(nx_ + 1) * (ny_ + 1); }
  Index interior_count() const { return Index(nx_ - 1) * (ny_ - 1); }
  int element_count() const { return 2 * nx_ * ny_; }

  Index node(int i, int j) const { return Index(j) * (nx_ + 1) + i; }
  /// Interior number of node (i, j), or -1 on the boundary.
  Index interior(int i, int j) const;
  Index interior_of_node(Index node) const;
  std::pair<int, int> ij(Index node) const;
  std::pair<int, int> interior_ij(Index k) const;

  Point position(int i, int j) const { return Point(rect_.x0 + i * h_, rect_.y0 + j * h_, 0.0); }
  Point interior_position(Index k) const;

  /// Vertices (full node numbers) of element e: lower triangles have even
  /// numbers, upper triangles odd ones.
  std::array<Index, 3> element_nodes(int e) const;
  Point element_centroid(int e) const;
  /// Constant gradients of the three barycentric functions of element e.
  std::array<Eigen::Vector2d, 3> element_gradients(int e) const;
  double element_area() const { return 0.5 * h_ * h_; }

  /// Element and barycentric coordinates of a point of the closed rectangle.
  Location locate(const Point& p) const;

  /// Diagonal of the lumped mass matrix (every interior hat has area h^2).
  double lumped_mass() const { return h_ * h_; }

private:
  Rectangle rect_;
  int nx_, ny_;
  double h_;
};

/// Structured grid with n cells along the shorter side; the longer side must
/// be an integer multiple of the resulting mesh size.
Grid build_grid(const Rectangle& rect, int n);

/// Piecewise-constant coefficient matrix, sampled at element centroids.
struct CoefficientField {
  std::vector<Eigen::Matrix2d> values;
  double beta = 1.0; ///< ellipticity constant

  static CoefficientField identity(const Grid& grid);
  static CoefficientField scalar(const Grid& grid, double c);
  static CoefficientField sample(const Grid& grid, const std::function<Eigen::Matrix2d(const Point&)>& a,
                                 double beta);
};

/// Throws unless x^T a x >= beta |x|^2 on every element for the coordinate
/// and diagonal directions.
void check_ellipticity(const CoefficientField& field);

/// Assembled P1 stiffness of -div(a grad u) with homogeneous Dirichlet
/// data, together with factorizations of the matrix and its transpose.
class EllipticOperator {
public:
  EllipticOperator(Grid grid, SparseMatrix stiffness, double beta);

  const Grid& grid() const { return grid_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& adjoint() const { return adjoint_; }
  double beta() const { return beta_; }
  bool symmetric() const { return symmetric_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_adjoint(const Eigen::VectorXd& rhs) const;

private:
  struct Factorizations;
  Grid grid_;
  SparseMatrix stiffness_;
  SparseMatrix adjoint_;
  double beta_;
  bool symmetric_;
  std::shared_ptr<const Factorizations> factors_;
};

EllipticOperator assemble(const Grid& grid, const CoefficientField& a);

/// Identity-coefficient stiffness (the 5-point Laplacian on this mesh).
SparseMatrix laplacian_stiffness(const Grid& grid);

/// m_i = mu(phi_i) for every interior hat function phi_i.
Eigen::VectorXd load_vector(const Grid& grid, const Measure& mu);

/// Hat-function weights of a point: interior node numbers and values.
std::vector<std::pair<Index, double>> hat_weights(const Grid& grid, const Point& p);

/// Piecewise-linear interpolant of u at p.
double interpolate(const Grid& grid, const NodalFunction& u, const Point& p);

/// Discrete Stampacchia solution: stiffness * u = load_vector(mu).
NodalFunction solve_dirichlet(const EllipticOperator& op, const Measure& mu);

/// Column of the discrete Green function for a unit mass at y.
NodalFunction discrete_green(const EllipticOperator& op, const Point& y);

struct GreenBounds {
  double c1 = 0.0;        ///< min ratio
  double c2 = 0.0;        ///< max ratio
  double d1 = 0.0;
  double d2 = 0.0;
  double offset = 0.0;    ///< d' added to G(|x-y|)
  std::size_t pairs = 0;
  double nearest_min = 0.0; ///< ratio range over pairs at the smallest admissible distance
  double nearest_max = 0.0;
};

/// Empirical comparison of the discrete Green function with the fundamental
/// solution over node pairs of K with |x - y| in [2h, diam(K)/2]:
/// c1 (G + d') <= G^A <= c2 (G + d'), hence d1 = 0 and d2 = c2 d'.
GreenBounds check_green_bounds(const EllipticOperator& op, const Rectangle& K);

/// |int u_mu g dx - int u*_g dmu| with lumped mass on the left and hat
/// interpolation of the adjoint solution on the right.
double duality_check(const EllipticOperator& op, const Measure& mu, const NodalFunction& g);

/// T_k(s) = max(-k, min(s, k)), nodewise.
NodalFunction truncate(const NodalFunction& u, double k);

/// beta * T_k(u)^T L T_k(u) with L the identity-coefficient stiffness.
double truncation_energy(const EllipticOperator& op, const NodalFunction& u, double k);

/// min v^T L v over nodal v with v = 1 on E (interior node numbers) and
/// v = 0 on the boundary.
double estimate_capacity(const Grid& grid, const std::vector<Index>& E);

/// Interior nodes within distance r of c.
std::vector<Index> nodes_in_disk(const Grid& grid, const Point& c, double r);
Index nearest_interior_node(const Grid& grid, const Point& p);

/// sum_i h^2 |u_i|
double l1_norm(const Grid& grid, const NodalFunction& u);

/// CSV rows x,y,value over interior nodes after '#' metadata lines.
void write_csv(std::ostream& os, const Grid& grid, const NodalFunction& u, const std::string& name = "value");

} // namespace obstlab

#endif // OBSTLAB_GRID_HPP
