#include "obstlab/grid.hpp"

#include "obstlab/kernels.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace obstlab {

// ---------------------------------------------------------------- Grid

Grid::Grid(Rectangle rect, int nx, int ny) : rect_(rect), nx_(nx), ny_(ny), h_(rect.width() / nx)
{
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0))
    throw std::invalid_argument("Grid: degenerate rectangle");
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("Grid: need at least two cells per side");
  if (std::abs(rect.height() / ny - h_) > 1e-12 * h_)
    throw std::invalid_argument("Grid: cells must be square");
}

Index Grid::interior(int i, int j) const
{
  if (i <= 0 || j <= 0 || i >= nx_ || j >= ny_)
    return -1;
  return Index(j - 1) * (nx_ - 1) + (i - 1);
}

Index Grid::interior_of_node(Index node) const
{
  const auto [i, j] = ij(node);
  return interior(i, j);
}

std::pair<int, int> Grid::ij(Index node) const
{
  return {static_cast<int>(node % (nx_ + 1)), static_cast<int>(node / (nx_ + 1))};
}

std::pair<int, int> Grid::interior_ij(Index k) const
{
  return {static_cast<int>(k % (nx_ - 1)) + 1, static_cast<int>(k / (nx_ - 1)) + 1};
}

Point Grid::interior_position(Index k) const
{
  const auto [i, j] = interior_ij(k);
  return position(i, j);
}

std::array<Index, 3> Grid::element_nodes(int e) const
{
  const int cell = e / 2;
  const int i = cell % nx_, j = cell / nx_;
  if (e % 2 == 0)
    return {node(i, j), node(i + 1, j), node(i + 1, j + 1)};
  return {node(i, j), node(i + 1, j + 1), node(i, j + 1)};
}

Point Grid::element_centroid(int e) const
{
  const auto v = element_nodes(e);
  Point c = Point::Zero();
  for (Index n : v) {
    const auto [i, j] = ij(n);
    c += position(i, j);
  }
  return c / 3.0;
}

std::array<Eigen::Vector2d, 3> Grid::element_gradients(int e) const
{
  const double s = 1.0 / h_;
  if (e % 2 == 0)
    return {Eigen::Vector2d(-s, 0.0), Eigen::Vector2d(s, -s), Eigen::Vector2d(0.0, s)};
  return {Eigen::Vector2d(0.0, -s), Eigen::Vector2d(s, 0.0), Eigen::Vector2d(-s, s)};
}

Grid::Location Grid::locate(const Point& p) const
{
  const double sx = (p[0] - rect_.x0) / h_;
  const double sy = (p[1] - rect_.y0) / h_;
  const double eps = 1e-12;
  if (sx < -eps || sy < -eps || sx > nx_ + eps || sy > ny_ + eps)
    throw std::invalid_argument("Grid::locate: point outside the rectangle");
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, ny_ - 1);
  const double xi = std::clamp(sx - i, 0.0, 1.0);
  const double eta = std::clamp(sy - j, 0.0, 1.0);
  const int e = 2 * (j * nx_ + i) + (xi >= eta ? 0 : 1);
  Location loc{element_nodes(e), Eigen::Vector3d::Zero(), e};
  if (xi >= eta)
    loc.weights = Eigen::Vector3d(1.0 - xi, xi - eta, eta);
  else
    loc.weights = Eigen::Vector3d(1.0 - eta, xi, eta - xi);
  return loc;
}

Grid build_grid(const Rectangle& rect, int n)
{
  if (n < 4)
    throw std::invalid_argument("build_grid: need n >= 4");
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0))
    throw std::invalid_argument("build_grid: degenerate rectangle");
  const double h = std::min(rect.width(), rect.height()) / n;
  const double fx = rect.width() / h, fy = rect.height() / h;
  const int nx = static_cast<int>(std::lround(fx)), ny = static_cast<int>(std::lround(fy));
  if (std::abs(fx - nx) > 1e-9 || std::abs(fy - ny) > 1e-9)
    throw std::invalid_argument("build_grid: sides are not commensurate with the mesh size");
  Rectangle r = rect;
  // keep h bit-identical along both axes
  r.x1 = r.x0 + nx * h;
  r.y1 = r.y0 + ny * h;
  return Grid(r, nx, ny);
}

// ---------------------------------------------------------------- coefficients

CoefficientField CoefficientField::identity(const Grid& grid) { return scalar(grid, 1.0); }

CoefficientField CoefficientField::scalar(const Grid& grid, double c)
{
  CoefficientField f;
  f.values.assign(grid.element_count(), c * Eigen::Matrix2d::Identity());
  f.beta = c;
  check_ellipticity(f);
  return f;
}

CoefficientField CoefficientField::sample(const Grid& grid, const std::function<Eigen::Matrix2d(const Point&)>& a,
                                          double beta)
{
  CoefficientField f;
  f.beta = beta;
  f.values.reserve(grid.element_count());
  for (int e = 0; e < grid.element_count(); ++e)
    f.values.push_back(a(grid.element_centroid(e)));
  check_ellipticity(f);
  return f;
}

void check_ellipticity(const CoefficientField& field)
{
  if (!(field.beta > 0.0))
    throw std::invalid_argument("ellipticity constant must be positive");
  const double r = std::sqrt(0.5);
  const Eigen::Vector2d dirs[] = {{1.0, 0.0}, {0.0, 1.0}, {r, r}, {r, -r}};
  for (const Eigen::Matrix2d& a : field.values) {
    if (!a.allFinite())
      throw std::invalid_argument("coefficient field has non-finite entries");
    for (const auto& xi : dirs)
      if (xi.dot(a * xi) < field.beta * (1.0 - 1e-12))
        throw std::invalid_argument("coefficient field violates the ellipticity bound");
  }
}

// ---------------------------------------------------------------- operator

struct EllipticOperator::Factorizations {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_adjoint;
};

EllipticOperator::EllipticOperator(Grid grid, SparseMatrix stiffness, double beta)
    : grid_(std::move(grid)), stiffness_(std::move(stiffness)), beta_(beta)
{
  stiffness_.makeCompressed();
  adjoint_ = stiffness_.transpose();
  adjoint_.makeCompressed();
  symmetric_ = (stiffness_ - adjoint_).norm() == 0.0;

  auto f = std::make_shared<Factorizations>();
  if (symmetric_) {
    f->ldlt.compute(stiffness_);
    if (f->ldlt.info() != Eigen::Success)
      throw std::runtime_error("EllipticOperator: factorization failed");
  } else {
    f->lu.compute(stiffness_);
    f->lu_adjoint.compute(adjoint_);
    if (f->lu.info() != Eigen::Success || f->lu_adjoint.info() != Eigen::Success)
      throw std::runtime_error("EllipticOperator: factorization failed");
  }
  factors_ = std::move(f);
}

namespace {

template <typename Solver>
Eigen::VectorXd refined_solve(const Solver& solver, const SparseMatrix& A, const Eigen::VectorXd& b)
{
  Eigen::VectorXd x = solver.solve(b);
  const double scale = std::max(b.norm(), std::numeric_limits<double>::min());
  for (int step = 0; step < 3; ++step) {
    const Eigen::VectorXd r = b - A * x;
    if (r.norm() <= 1e-13 * scale)
      break;
    x += solver.solve(r);
  }
  return x;
}

} // namespace

Eigen::VectorXd EllipticOperator::solve(const Eigen::VectorXd& rhs) const
{
  if (rhs.size() != stiffness_.rows())
    throw std::invalid_argument("EllipticOperator::solve: size mismatch");
  if (symmetric_)
    return refined_solve(factors_->ldlt, stiffness_, rhs);
  return refined_solve(factors_->lu, stiffness_, rhs);
}

Eigen::VectorXd EllipticOperator::solve_adjoint(const Eigen::VectorXd& rhs) const
{
  if (rhs.size() != adjoint_.rows())
    throw std::invalid_argument("EllipticOperator::solve_adjoint: size mismatch");
  if (symmetric_)
    return refined_solve(factors_->ldlt, adjoint_, rhs);
  return refined_solve(factors_->lu_adjoint, adjoint_, rhs);
}

namespace {

SparseMatrix assemble_matrix(const Grid& grid, const std::vector<Eigen::Matrix2d>& a)
{
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.element_count()) * 9);
  const double area = grid.element_area();
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    const auto grads = grid.element_gradients(e);
    for (int r = 0; r < 3; ++r) {
      const Index row = grid.interior_of_node(nodes[r]);
      if (row < 0)
        continue;
      for (int c = 0; c < 3; ++c) {
        const Index col = grid.interior_of_node(nodes[c]);
        if (col < 0)
          continue;
        const double v = area * grads[r].dot(a[e] * grads[c]);
        if (v != 0.0)
          triplets.emplace_back(row, col, v);
      }
    }
  }
  SparseMatrix K(grid.interior_count(), grid.interior_count());
  K.setFromTriplets(triplets.begin(), triplets.end());
  K.makeCompressed();
  return K;
}

} // namespace

EllipticOperator assemble(const Grid& grid, const CoefficientField& a)
{
  if (static_cast<int>(a.values.size()) != grid.element_count())
    throw std::invalid_argument("assemble: coefficient field does not match the grid");
  check_ellipticity(a);
  return EllipticOperator(grid, assemble_matrix(grid, a.values), a.beta);
}

SparseMatrix laplacian_stiffness(const Grid& grid)
{
  return assemble_matrix(grid, std::vector<Eigen::Matrix2d>(grid.element_count(), Eigen::Matrix2d::Identity()));
}

// ---------------------------------------------------------------- loads

std::vector<std::pair<Index, double>> hat_weights(const Grid& grid, const Point& p)
{
  const Grid::Location loc = grid.locate(p);
  std::vector<std::pair<Index, double>> out;
  for (int a = 0; a < 3; ++a) {
    const Index k = grid.interior_of_node(loc.nodes[a]);
    if (k >= 0 && loc.weights[a] != 0.0)
      out.emplace_back(k, loc.weights[a]);
  }
  return out;
}

double interpolate(const Grid& grid, const NodalFunction& u, const Point& p)
{
  double v = 0.0;
  for (const auto& [k, w] : hat_weights(grid, p))
    v += w * u[k];
  return v;
}

namespace {

// Degree-5 seven-point rule on a triangle (barycentric points, weights
// relative to the area).
struct TrianglePoint {
  double l0, l1, l2, w;
};

const std::array<TrianglePoint, 7>& triangle_rule()
{
  static const std::array<TrianglePoint, 7> rule = [] {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    return std::array<TrianglePoint, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
                                         {a1, b1, b1, w1},
                                         {b1, a1, b1, w1},
                                         {b1, b1, a1, w1},
                                         {a2, b2, b2, w2},
                                         {b2, a2, b2, w2},
                                         {b2, b2, a2, w2}}};
  }();
  return rule;
}

void add_density_load(const Grid& grid, const Density& f, Eigen::VectorXd& m)
{
  const double area = grid.element_area();
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    std::array<Index, 3> k;
    std::array<Point, 3> x;
    bool any = false;
    for (int a = 0; a < 3; ++a) {
      k[a] = grid.interior_of_node(nodes[a]);
      any = any || k[a] >= 0;
      const auto [i, j] = grid.ij(nodes[a]);
      x[a] = grid.position(i, j);
    }
    if (!any)
      continue;
    for (const TrianglePoint& q : triangle_rule()) {
      const Point p = q.l0 * x[0] + q.l1 * x[1] + q.l2 * x[2];
      const double fw = f(p) * q.w * area;
      const double l[3] = {q.l0, q.l1, q.l2};
      for (int a = 0; a < 3; ++a)
        if (k[a] >= 0)
          m[k[a]] += fw * l[a];
    }
  }
}

void add_segment_load(const Grid& grid, const Point& a, const Point& b, double density, Eigen::VectorXd& m)
{
  const Rectangle& R = grid.rect();
  const double h = grid.h();
  std::vector<double> cuts{0.0, 1.0};
  auto crossings = [&](double g0, double g1) {
    // parameters where the affine function g(s) = g0 + s (g1 - g0) is an integer
    if (g0 == g1)
      return;
    const double lo = std::min(g0, g1), hi = std::max(g0, g1);
    for (double v = std::ceil(lo); v <= hi; v += 1.0) {
      const double s = (v - g0) / (g1 - g0);
      if (s > 0.0 && s < 1.0)
        cuts.push_back(s);
    }
  };
  crossings((a[0] - R.x0) / h, (b[0] - R.x0) / h);
  crossings((a[1] - R.y0) / h, (b[1] - R.y0) / h);
  crossings(((a[1] - R.y0) - (a[0] - R.x0)) / h, ((b[1] - R.y0) - (b[0] - R.x0)) / h);
  std::sort(cuts.begin(), cuts.end());

  const double len = (b - a).norm();
  const double g = 0.5 / std::sqrt(3.0);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double s0 = cuts[c], s1 = cuts[c + 1];
    if (s1 <= s0)
      continue;
    const double mid = 0.5 * (s0 + s1), half = s1 - s0;
    for (double t : {mid - g * half, mid + g * half}) {
      const Point p = a + t * (b - a);
      for (const auto& [k, w] : hat_weights(grid, p))
        m[k] += density * len * 0.5 * half * w;
    }
  }
}

} // namespace

Eigen::VectorXd load_vector(const Grid& grid, const Measure& mu)
{
  if (mu.dim() != 2)
    throw std::invalid_argument("load_vector: planar measures only");
  const Box box = grid.rect().box();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(grid.interior_count());
  for (const Atom& atom : mu.atoms()) {
    if (!box.contains_closed(atom.location))
      throw std::invalid_argument("load_vector: atom outside the closed rectangle");
    for (const auto& [k, w] : hat_weights(grid, atom.location))
      m[k] += atom.mass * w;
  }
  for (const CurvePiece& c : mu.curves())
    for (std::size_t i = 0; i + 1 < c.polyline.size(); ++i) {
      if (!box.contains_closed(c.polyline[i]) || !box.contains_closed(c.polyline[i + 1]))
        throw std::invalid_argument("load_vector: curve outside the closed rectangle");
      add_segment_load(grid, c.polyline[i], c.polyline[i + 1], c.linear_density, m);
    }
  if (mu.diffuse())
    add_density_load(grid, *mu.diffuse(), m);
  return m;
}

NodalFunction solve_dirichlet(const EllipticOperator& op, const Measure& mu)
{
  return op.solve(load_vector(op.grid(), mu));
}

NodalFunction discrete_green(const EllipticOperator& op, const Point& y)
{
  Eigen::VectorXd m = Eigen::VectorXd::Zero(op.grid().interior_count());
  for (const auto& [k, w] : hat_weights(op.grid(), y))
    m[k] += w;
  return op.solve(m);
}

// ---------------------------------------------------------------- checks

GreenBounds check_green_bounds(const EllipticOperator& op, const Rectangle& K)
{
  const Grid& grid = op.grid();
  std::vector<Index> nodes;
  for (Index k = 0; k < grid.interior_count(); ++k) {
    const Point p = grid.interior_position(k);
    if (p[0] >= K.x0 && p[0] <= K.x1 && p[1] >= K.y0 && p[1] <= K.y1)
      nodes.push_back(k);
  }
  const double diam = std::hypot(K.width(), K.height());
  const double lo = 2.0 * grid.h() * (1.0 - 1e-9), hi = 0.5 * diam * (1.0 + 1e-9);

  GreenBounds out;
  // G(s) + d' >= log(2) / (2 pi) for s <= diam / 2
  out.offset = std::max(0.0, std::log(diam) / (2.0 * std::numbers::pi));
  out.c1 = out.nearest_min = std::numeric_limits<double>::infinity();
  out.c2 = out.nearest_max = -std::numeric_limits<double>::infinity();
  for (Index y : nodes) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(grid.interior_count());
    unit[y] = 1.0;
    const Eigen::VectorXd G = op.solve(unit);
    const Point py = grid.interior_position(y);
    for (Index x : nodes) {
      const double s = (grid.interior_position(x) - py).norm();
      if (s < lo || s > hi)
        continue;
      const double ratio = G[x] / (fundamental_solution(2, s) + out.offset);
      out.c1 = std::min(out.c1, ratio);
      out.c2 = std::max(out.c2, ratio);
      if (s <= lo / (1.0 - 1e-9) * (1.0 + 1e-9)) {
        out.nearest_min = std::min(out.nearest_min, ratio);
        out.nearest_max = std::max(out.nearest_max, ratio);
      }
      ++out.pairs;
    }
  }
  if (out.pairs == 0)
    throw std::invalid_argument("check_green_bounds: no admissible node pairs in K");
  out.d1 = 0.0;
  out.d2 = out.c2 * out.offset;
  return out;
}

double duality_check(const EllipticOperator& op, const Measure& mu, const NodalFunction& g)
{
  const Grid& grid = op.grid();
  if (g.size() != grid.interior_count())
    throw std::invalid_argument("duality_check: g does not match the grid");
  const Eigen::VectorXd m = load_vector(grid, mu);
  const NodalFunction u = op.solve(m);
  const double lhs = grid.lumped_mass() * u.dot(g);
  const NodalFunction adjoint = op.solve_adjoint(grid.lumped_mass() * g);
  double rhs = 0.0;
  for (const Atom& a : mu.atoms())
    rhs += a.mass * interpolate(grid, adjoint, a.location);
  Measure rest(mu.domain());
  for (const CurvePiece& c : mu.curves())
    rest.add_curve(c.polyline, c.linear_density);
  if (mu.diffuse())
    rest.add_density(*mu.diffuse());
  if (!rest.empty())
    rhs += adjoint.dot(load_vector(grid, rest));
  return std::abs(lhs - rhs);
}

NodalFunction truncate(const NodalFunction& u, double k)
{
  return u.cwiseMax(-k).cwiseMin(k);
}

double truncation_energy(const EllipticOperator& op, const NodalFunction& u, double k)
{
  if (!(k > 0.0))
    throw std::invalid_argument("truncation_energy: k must be positive");
  const NodalFunction t = truncate(u, k);
  const SparseMatrix L = laplacian_stiffness(op.grid());
  return op.beta() * t.dot(L * t);
}

double estimate_capacity(const Grid& grid, const std::vector<Index>& E)
{
  if (E.empty())
    return 0.0;
  const Index n = grid.interior_count();
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (Index k : E) {
    if (k < 0 || k >= n)
      throw std::invalid_argument("estimate_capacity: node out of range");
    fixed[static_cast<std::size_t>(k)] = 1;
  }
  std::vector<Index> free_index(static_cast<std::size_t>(n), -1);
  Index nf = 0;
  for (Index k = 0; k < n; ++k)
    if (!fixed[static_cast<std::size_t>(k)])
      free_index[static_cast<std::size_t>(k)] = nf++;

  const SparseMatrix L = laplacian_stiffness(grid);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (Index k : E)
    v[k] = 1.0;
  if (nf > 0) {
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (Index col = 0; col < L.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(L, col); it; ++it) {
        const Index r = free_index[static_cast<std::size_t>(it.row())];
        if (r < 0)
          continue;
        const Index c = free_index[static_cast<std::size_t>(it.col())];
        if (c >= 0)
          t.emplace_back(r, c, it.value());
        else
          rhs[r] -= it.value();
      }
    SparseMatrix LFF(nf, nf);
    LFF.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SparseMatrix> solver(LFF);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("estimate_capacity: factorization failed");
    const Eigen::VectorXd vf = solver.solve(rhs);
    for (Index k = 0; k < n; ++k)
      if (free_index[static_cast<std::size_t>(k)] >= 0)
        v[k] = vf[free_index[static_cast<std::size_t>(k)]];
  }
  return v.dot(L * v);
}

std::vector<Index> nodes_in_disk(const Grid& grid, const Point& c, double r)
{
  std::vector<Index> out;
  for (Index k = 0; k < grid.interior_count(); ++k)
    if ((grid.interior_position(k) - c).norm() <= r)
      out.push_back(k);
  return out;
}

Index nearest_interior_node(const Grid& grid, const Point& p)
{
  Index best = -1;
  double dist = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < grid.interior_count(); ++k) {
    const double d = (grid.interior_position(k) - p).norm();
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  return best;
}

double l1_norm(const Grid& grid, const NodalFunction& u) { return grid.lumped_mass() * u.lpNorm<1>(); }

void write_csv(std::ostream& os, const Grid& grid, const NodalFunction& u, const std::string& name)
{
  const auto precision = os.precision(17);
  const Rectangle& R = grid.rect();
  os << "# grid x0=" << R.x0 << " y0=" << R.y0 << " x1=" << R.x1 << " y1=" << R.y1 << " nx=" << grid.nx()
     << " ny=" << grid.ny() << " h=" << grid.h() << '\n';
  os << "# interior_nodes=" << grid.interior_count() << '\n';
  os << "x,y," << name << '\n';
  for (Index k = 0; k < grid.interior_count(); ++k) {
    const Point p = grid.interior_position(k);
    os << p[0] << ',' << p[1] << ',' << u[k] << '\n';
  }
  os.precision(precision);
}

} // namespace obstlab
