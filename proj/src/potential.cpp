#include "obstlab/potential.hpp"

#include "obstlab/quadrature.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace obstlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using RadialKernel = std::function<double(double)>;

// Integral of kernel(|x - p|) along one segment. `extra_radius` > 0 adds the
// parameters where |x - p| crosses that radius as break points.
double segment_integral(const Point& a, const Point& b, const Point& x, const RadialKernel& kernel,
                        double extra_radius, const PotentialOptions& opt)
{
  const Point d = b - a;
  const double len = d.norm();
  const Point e = d / len;
  const double foot = e.dot(x - a);
  const double perp = ((x - a) - foot * e).norm();

  std::vector<double> breaks;
  if (perp < opt.split_distance)
    breaks.push_back(foot);
  if (extra_radius > perp) {
    const double half = std::sqrt(extra_radius * extra_radius - perp * perp);
    breaks.push_back(foot - half);
    breaks.push_back(foot + half);
  }
  AdaptiveOptions ao;
  ao.abs_tolerance = opt.curve_tolerance;
  return integrate_adaptive(
      [&](double t) {
        const double s = (x - a - t * e).norm();
        return s > 0.0 ? kernel(s) : 0.0;
      },
      0.0, len, breaks, ao);
}

bool on_polyline(const CurvePiece& c, const Point& x)
{
  for (std::size_t i = 0; i + 1 < c.polyline.size(); ++i) {
    const Point& a = c.polyline[i];
    const Point d = c.polyline[i + 1] - a;
    const double t = d.dot(x - a) / d.squaredNorm();
    // rounding in a + t d; treat a sub-ulp distance as lying on the segment
    if (t >= 0.0 && t <= 1.0 && (a + t * d - x).norm() <= 1e-14 * (1.0 + d.norm()))
      return true;
  }
  return false;
}

// Cellwise tensor Gauss with recursive bisection of cells near x.
double diffuse_integral(const Density& f, const Box& box, const Point& x, const RadialKernel& kernel,
                        const PotentialOptions& opt)
{
  const int dim = box.dim;
  const int cells = dim == 2 ? opt.cells.cells_2d : opt.cells.cells_3d;
  const GaussRule& rule = gauss_legendre(dim == 2 ? opt.cells.points_2d : opt.cells.points_3d);
  const int np = static_cast<int>(rule.nodes.size());

  std::function<double(const Point&, const Point&, int)> cell = [&](const Point& lo, const Point& size,
                                                                     int depth) -> double {
    const Point centre = lo + 0.5 * size;
    const double diam = size.norm();
    if (depth < opt.refine_depth && (centre - x).norm() < opt.refine_radius * diam) {
      const Point half = 0.5 * size;
      double sum = 0.0;
      const int nz = dim == 3 ? 2 : 1;
      for (int k = 0; k < nz; ++k)
        for (int j = 0; j < 2; ++j)
          for (int i = 0; i < 2; ++i)
            sum += cell(lo + Point(i * half[0], j * half[1], k * half[2]), half, depth + 1);
      return sum;
    }
    double vol = size[0] * size[1];
    if (dim == 3)
      vol *= size[2];
    double sum = 0.0;
    const int pz = dim == 3 ? np : 1;
    Point y;
    for (int c = 0; c < pz; ++c)
      for (int b = 0; b < np; ++b)
        for (int a = 0; a < np; ++a) {
          y[0] = lo[0] + rule.nodes[a] * size[0];
          y[1] = lo[1] + rule.nodes[b] * size[1];
          y[2] = dim == 3 ? lo[2] + rule.nodes[c] * size[2] : 0.0;
          const double s = (y - x).norm();
          if (s == 0.0)
            continue;
          double w = rule.weights[a] * rule.weights[b];
          if (dim == 3)
            w *= rule.weights[c];
          sum += w * kernel(s) * f(y);
        }
    return sum * vol;
  };

  Point size = (box.upper - box.lower) / cells;
  if (dim == 2)
    size[2] = 0.0;
  double total = 0.0;
  const int nz = dim == 3 ? cells : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < cells; ++j)
      for (int i = 0; i < cells; ++i)
        total += cell(box.lower + Point(i * size[0], j * size[1], k * size[2]), size, 0);
  return total;
}

double carrier_integral(const Measure& mu, const Point& x, const RadialKernel& kernel, double extra_radius,
                        const PotentialOptions& opt)
{
  double total = 0.0;
  for (const CurvePiece& c : mu.curves())
    for (std::size_t i = 0; i + 1 < c.polyline.size(); ++i)
      total += c.linear_density * segment_integral(c.polyline[i], c.polyline[i + 1], x, kernel, extra_radius, opt);
  if (mu.diffuse())
    total += diffuse_integral(*mu.diffuse(), mu.domain(), x, kernel, opt);
  return total;
}

} // namespace

double potential(const Measure& mu, const Point& x, const PotentialOptions& options)
{
  const int dim = mu.dim();
  double total = 0.0;
  for (const Atom& a : mu.atoms()) {
    const double s = (a.location - x).norm();
    if (s == 0.0)
      return a.mass > 0 ? kInf : -kInf;
    total += a.mass * fundamental_solution(dim, s);
  }
  if (dim == 3)
    for (const CurvePiece& c : mu.curves())
      if (on_polyline(c, x))
        return c.linear_density > 0 ? kInf : -kInf;
  auto kernel = [dim](double s) { return fundamental_solution(dim, s); };
  return total + carrier_integral(mu, x, kernel, 0.0, options);
}

double ball_average_potential(const Measure& mu, const Point& x, double r, const PotentialOptions& options)
{
  if (!(r > 0.0))
    throw std::invalid_argument("ball_average_potential: radius must be positive");
  const int dim = mu.dim();
  auto kernel = [dim, r](double s) { return averaged_kernel(dim, r, s); };
  double total = 0.0;
  for (const Atom& a : mu.atoms())
    total += a.mass * kernel((a.location - x).norm());
  return total + carrier_integral(mu, x, kernel, r, options);
}

RatioScan ratio_scan(const Measure& mu, const Measure& nu, const Point& x, const std::vector<double>& radii,
                     const PotentialOptions& options)
{
  if (radii.empty())
    throw std::invalid_argument("ratio_scan: empty radius ladder");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0))
      throw std::invalid_argument("ratio_scan: radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1]))
      throw std::invalid_argument("ratio_scan: radii must be strictly decreasing");
  }
  if (!is_nonnegative(mu) || !is_nonnegative(nu))
    throw std::invalid_argument("ratio_scan: measures must be non-negative");
  if (!mutually_singular(mu, nu))
    throw std::invalid_argument("ratio_scan: measures are not mutually singular");

  RatioScan scan;
  scan.center = x;
  scan.radii = radii;
  for (double r : radii) {
    const double num = ball_average_potential(nu, x, r, options);
    const double den = ball_average_potential(mu, x, r, options);
    if (den == 0.0)
      throw std::domain_error("ratio_scan: zero denominator average");
    scan.numerator_averages.push_back(num);
    scan.denominator_averages.push_back(den);
    scan.ratios.push_back(num / den);
  }
  return scan;
}

void write_csv(std::ostream& os, const RatioScan& scan)
{
  const auto precision = os.precision(17);
  os << "# center=" << scan.center[0] << ',' << scan.center[1] << ',' << scan.center[2] << '\n';
  os << "radius,num_avg,den_avg,ratio\n";
  for (std::size_t i = 0; i < scan.radii.size(); ++i)
    os << scan.radii[i] << ',' << scan.numerator_averages[i] << ',' << scan.denominator_averages[i] << ','
       << scan.ratios[i] << '\n';
  os.precision(precision);
}

std::vector<double> dyadic_radii(int from, int to)
{
  if (to < from)
    throw std::invalid_argument("dyadic_radii: empty ladder");
  std::vector<double> radii;
  for (int k = from; k <= to; ++k)
    radii.push_back(std::ldexp(1.0, -k));
  return radii;
}

} // namespace obstlab
