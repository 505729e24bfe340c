#include "obstlab/measure.hpp"

#include "obstlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace obstlab {

namespace {

constexpr double kSameLocation = 1e-14;

bool same_point(const Point& a, const Point& b) { return (a - b).norm() <= kSameLocation; }

// Two segments share a piece of positive length.
bool segments_overlap(const Point& p1, const Point& p2, const Point& q1, const Point& q2)
{
  const Point d = p2 - p1;
  const double len = d.norm();
  const Point e = d / len;
  const double tol = 1e-12 * std::max(1.0, len);
  auto off_line = [&](const Point& q) { return ((q - p1) - e * e.dot(q - p1)).norm() > tol; };
  if (off_line(q1) || off_line(q2))
    return false;
  const double a = e.dot(q1 - p1), b = e.dot(q2 - p1);
  const double lo = std::max(0.0, std::min(a, b));
  const double hi = std::min(len, std::max(a, b));
  return hi - lo > tol;
}

bool curves_overlap(const CurvePiece& c, const CurvePiece& d)
{
  for (std::size_t i = 0; i + 1 < c.polyline.size(); ++i)
    for (std::size_t j = 0; j + 1 < d.polyline.size(); ++j)
      if (segments_overlap(c.polyline[i], c.polyline[i + 1], d.polyline[j], d.polyline[j + 1]))
        return true;
  return false;
}

} // namespace

double CurvePiece::length() const
{
  double l = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i)
    l += (polyline[i + 1] - polyline[i]).norm();
  return l;
}

Measure::Measure(Box domain) : domain_(std::move(domain)) { check_dimension(domain_.dim); }

Measure& Measure::add_atom(const Point& location, double mass)
{
  if (!std::isfinite(mass) || mass == 0.0)
    throw std::invalid_argument("atom mass must be finite and non-zero");
  if (!domain_.contains(location))
    throw std::invalid_argument("atom location outside the open domain");
  for (const Atom& a : atoms_)
    if (same_point(a.location, location))
      throw std::invalid_argument("two atoms share a location");
  atoms_.push_back({location, mass});
  return *this;
}

Measure& Measure::add_curve(std::vector<Point> polyline, double linear_density)
{
  if (polyline.size() < 2)
    throw std::invalid_argument("curve piece needs at least two points");
  if (!std::isfinite(linear_density))
    throw std::invalid_argument("curve density must be finite");
  for (std::size_t i = 0; i < polyline.size(); ++i) {
    if (!domain_.contains(polyline[i]))
      throw std::invalid_argument("curve vertex outside the open domain");
    if (i > 0 && same_point(polyline[i], polyline[i - 1]))
      throw std::invalid_argument("curve piece has repeated consecutive points");
  }
  if (linear_density != 0.0)
    curves_.push_back({std::move(polyline), linear_density});
  return *this;
}

Measure& Measure::add_density(const Density& density)
{
  diffuse_ = diffuse_ ? *diffuse_ + density : density;
  return *this;
}

Measure Measure::operator+(const Measure& other) const
{
  if (other.dim() != dim())
    throw std::invalid_argument("measures of different dimension");
  Measure out = *this;
  for (const Atom& b : other.atoms_) {
    auto it = std::find_if(out.atoms_.begin(), out.atoms_.end(),
                           [&](const Atom& a) { return same_point(a.location, b.location); });
    if (it == out.atoms_.end())
      out.atoms_.push_back(b);
    else if ((it->mass += b.mass) == 0.0)
      out.atoms_.erase(it);
  }
  out.curves_.insert(out.curves_.end(), other.curves_.begin(), other.curves_.end());
  if (other.diffuse_)
    out.add_density(*other.diffuse_);
  return out;
}

Measure Measure::operator*(double factor) const
{
  if (factor == 0.0)
    return Measure(domain_);
  Measure out = *this;
  for (Atom& a : out.atoms_)
    a.mass *= factor;
  for (CurvePiece& c : out.curves_)
    c.linear_density *= factor;
  if (out.diffuse_)
    out.diffuse_ = *out.diffuse_ * factor;
  return out;
}

Measure Measure::operator-() const { return *this * -1.0; }

Measure Measure::operator-(const Measure& other) const { return *this + (-other); }

Measure dirac(const Box& domain, const Point& location, double mass)
{
  Measure m(domain);
  m.add_atom(location, mass);
  return m;
}

std::pair<Measure, Measure> jordan_decompose(const Measure& mu)
{
  Measure plus(mu.domain()), minus(mu.domain());
  for (const Atom& a : mu.atoms())
    (a.mass > 0 ? plus : minus).add_atom(a.location, std::abs(a.mass));
  for (const CurvePiece& c : mu.curves())
    (c.linear_density > 0 ? plus : minus).add_curve(c.polyline, std::abs(c.linear_density));
  if (mu.diffuse()) {
    const Density p = mu.diffuse()->positive_part(), n = mu.diffuse()->negative_part();
    if (!p.is_zero())
      plus.add_density(p);
    if (!n.is_zero())
      minus.add_density(n);
  }
  return {std::move(plus), std::move(minus)};
}

MeasureDecomposition capacity_decompose(const Measure& mu)
{
  check_dimension(mu.dim());
  MeasureDecomposition out{Measure(mu.domain()), Measure(mu.domain())};
  for (const Atom& a : mu.atoms())
    out.singular.add_atom(a.location, a.mass);
  Measure& curve_part = mu.dim() == 2 ? out.regular : out.singular;
  for (const CurvePiece& c : mu.curves())
    curve_part.add_curve(c.polyline, c.linear_density);
  if (mu.diffuse())
    out.regular.add_density(*mu.diffuse());
  return out;
}

double total_variation(const Measure& mu, const CellQuadrature& q)
{
  double tv = 0.0;
  for (const Atom& a : mu.atoms())
    tv += std::abs(a.mass);
  for (const CurvePiece& c : mu.curves())
    tv += std::abs(c.mass());
  if (mu.diffuse())
    tv += mu.diffuse()->integrate_abs(mu.domain(), q);
  return tv;
}

double total_mass(const Measure& mu, const CellQuadrature& q)
{
  double m = 0.0;
  for (const Atom& a : mu.atoms())
    m += a.mass;
  for (const CurvePiece& c : mu.curves())
    m += c.mass();
  if (mu.diffuse())
    m += mu.diffuse()->integrate(mu.domain(), q);
  return m;
}

bool mutually_singular(const Measure& mu, const Measure& nu, const CellQuadrature& q)
{
  if (mu.dim() != nu.dim())
    throw std::invalid_argument("mutually_singular: dimension mismatch");
  for (const Atom& a : mu.atoms())
    for (const Atom& b : nu.atoms())
      if (same_point(a.location, b.location))
        return false;
  for (const CurvePiece& c : mu.curves())
    for (const CurvePiece& d : nu.curves())
      if (curves_overlap(c, d))
        return false;
  if (mu.diffuse() && nu.diffuse()) {
    const Density& f = *mu.diffuse();
    const Density& g = *nu.diffuse();
    bool overlap = false;
    const Box& box = mu.domain();
    for_each_quadrature_point(box, q, [&](const Point& x, double) {
      if (!overlap && f(x) != 0.0 && g(x) != 0.0)
        overlap = true;
    });
    if (overlap)
      return false;
  }
  return true;
}

bool is_nonnegative(const Measure& mu, const CellQuadrature& q)
{
  for (const Atom& a : mu.atoms())
    if (a.mass < 0)
      return false;
  for (const CurvePiece& c : mu.curves())
    if (c.linear_density < 0)
      return false;
  if (mu.diffuse()) {
    if (mu.diffuse()->is_nodal()) {
      const auto& v = mu.diffuse()->samples().values;
      return std::all_of(v.begin(), v.end(), [](double s) { return s >= 0.0; });
    }
    bool ok = true;
    for_each_quadrature_point(mu.domain(), q, [&](const Point& x, double) {
      if (ok && (*mu.diffuse())(x) < 0.0)
        ok = false;
    });
    return ok;
  }
  return true;
}

} // namespace obstlab
