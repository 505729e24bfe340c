#ifndef OBSTLAB_DENSITY_HPP
#define OBSTLAB_DENSITY_HPP

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace obstlab {

/// Points live in R^3; planar data keep the third coordinate at zero.
using Point = Eigen::Vector3d;

/// Axis-aligned box standing in for the open domain.
struct Box {
  int dim = 2;
  Point lower = Point::Zero();
  Point upper = Point::Zero();

  Box() = default;
  Box(int dim, const Point& lower, const Point& upper);

  static Box unit(int dim);

  bool contains(const Point& p) const;        // open box
  bool contains_closed(const Point& p) const;
  double volume() const;
};

/// Values at the vertices of a uniform nx-by-ny cell grid on a planar box,
/// read as the piecewise bilinear interpolant. Row-major in y.
struct NodalSamples {
  Box box;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * (nx + 1) + i]; }
  double interpolate(const Point& x) const;
  double integrate() const;
  bool same_layout(const NodalSamples& other) const;
};

struct CellQuadrature {
  int cells_2d = 64;
  int points_2d = 4;
  int cells_3d = 16;
  int points_3d = 3;
};

/// Density of a diffuse measure with respect to Lebesgue measure.
///
/// An immutable expression tree: closed-form leaves (constant, affine,
/// sine product, Gaussian), nodal samples, and the combinators sum, scale,
/// positive part and negative part. Every node except `function` has a
/// text form (see `serialize`).
class Density {
public:
  enum class Kind { Constant, Affine, SineProduct, Gaussian, Nodal, Function, Sum, Scale, PositivePart, NegativePart };

  static Density constant(double value);
  /// c0 + gradient . x
  static Density affine(double c0, const Point& gradient);
  /// amplitude * prod_i sin(pi x_i) over the first `dim` coordinates
  static Density sine_product(double amplitude, int dim = 2);
  /// amplitude * exp(-|x - centre|^2 / (2 width^2))
  static Density gaussian(double amplitude, const Point& centre, double width);
  static Density nodal(NodalSamples samples);
  /// Arbitrary callable; cannot be serialized.
  static Density function(std::function<double(const Point&)> f, std::string label = "function");

  Kind kind() const;
  double operator()(const Point& x) const;

  Density operator+(const Density& other) const;
  Density operator*(double factor) const;
  Density operator-() const { return *this * -1.0; }
  /// max(f, 0)
  Density positive_part() const;
  /// max(-f, 0), so that f = positive_part() - negative_part()
  Density negative_part() const;

  bool is_nodal() const { return kind() == Kind::Nodal; }
  /// Zero constant, or nodal samples that are all zero.
  bool is_zero() const;
  const NodalSamples& samples() const;

  /// Integral of f over the box. Nodal samples are integrated exactly as
  /// bilinear interpolants; everything else by cellwise tensor Gauss rules.
  double integrate(const Box& box, const CellQuadrature& q = {}) const;
  /// Integral of |f|. For nodal samples this is the integral of the bilinear
  /// interpolant of |f_i|, which keeps |mu| = mu+ + mu- exact nodewise.
  double integrate_abs(const Box& box, const CellQuadrature& q = {}) const;

  /// Prefix-notation text form, e.g. "sum 2 const 1 sine 0.5".
  std::string serialize() const;
  /// Inverse of serialize(); consumes tokens from `pos`.
  static Density parse(const std::vector<std::string>& tokens, std::size_t& pos, int dim);

  struct Node;

private:
  explicit Density(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Calls f(point, weight) for every cellwise Gauss point of the box.
void for_each_quadrature_point(const Box& box, const CellQuadrature& q,
                               const std::function<void(const Point&, double)>& f);

} // namespace obstlab

#endif // OBSTLAB_DENSITY_HPP
