#ifndef OBSTLAB_MEASURE_HPP
#define OBSTLAB_MEASURE_HPP

#include "obstlab/density.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace obstlab {

struct Atom {
  Point location;
  double mass = 0.0;
};

/// Polyline carrying a constant linear density.
struct CurvePiece {
  std::vector<Point> polyline;
  double linear_density = 0.0;

  double length() const;
  double mass() const { return linear_density * length(); }
};

/// Bounded Radon measure on a box: diffuse density + atoms + curve pieces.
///
/// Built through the add_* calls and treated as a value afterwards. Atoms
/// sit in the open domain with non-zero mass at pairwise distinct
/// locations; polylines have at least two distinct consecutive vertices.
class Measure {
public:
  explicit Measure(Box domain);

  int dim() const { return domain_.dim; }
  const Box& domain() const { return domain_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<CurvePiece>& curves() const { return curves_; }
  const std::optional<Density>& diffuse() const { return diffuse_; }

  Measure& add_atom(const Point& location, double mass);
  Measure& add_curve(std::vector<Point> polyline, double linear_density);
  /// Adds to the diffuse part (densities accumulate by summation).
  Measure& add_density(const Density& density);

  bool empty() const { return atoms_.empty() && curves_.empty() && !diffuse_; }

  /// Atoms at equal locations are merged; cancelling atoms disappear.
  Measure operator+(const Measure& other) const;
  Measure operator-(const Measure& other) const;
  Measure operator-() const;
  Measure operator*(double factor) const;

private:
  Box domain_;
  std::vector<Atom> atoms_;
  std::vector<CurvePiece> curves_;
  std::optional<Density> diffuse_;
};

Measure dirac(const Box& domain, const Point& location, double mass = 1.0);

/// Capacity splitting mu = mu_a + mu_s.
struct MeasureDecomposition {
  Measure regular;
  Measure singular;
};

/// (mu+, mu-), both non-negative, mu = mu+ - mu-.
std::pair<Measure, Measure> jordan_decompose(const Measure& mu);

/// Points are polar in the plane; points and rectifiable curves are polar in
/// space. Everything else in the representation charges no polar set.
MeasureDecomposition capacity_decompose(const Measure& mu);

/// |mu|(Omega)
double total_variation(const Measure& mu, const CellQuadrature& q = {});

/// Signed total mass mu(Omega).
double total_mass(const Measure& mu, const CellQuadrature& q = {});

/// Carrier disjointness decided on the representation: atom sets disjoint,
/// no two polylines share a segment of positive length, and diffuse parts
/// never both non-zero at a common sample point. Carriers of different
/// types are always disjoint.
bool mutually_singular(const Measure& mu, const Measure& nu, const CellQuadrature& q = {});

/// True when every atom and curve has non-negative mass and the density is
/// non-negative at every sample point.
bool is_nonnegative(const Measure& mu, const CellQuadrature& q = {});

} // namespace obstlab

#endif // OBSTLAB_MEASURE_HPP
