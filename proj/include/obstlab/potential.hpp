#ifndef OBSTLAB_POTENTIAL_HPP
#define OBSTLAB_POTENTIAL_HPP

#include "obstlab/kernels.hpp"
#include "obstlab/measure.hpp"

#include <iosfwd>
#include <vector>

namespace obstlab {

struct PotentialOptions {
  /// absolute tolerance of the adaptive rule along curve pieces
  double curve_tolerance = 1e-10;
  /// split a panel at the foot of the perpendicular when the evaluation
  /// point is closer than this to the panel
  double split_distance = 1e-3;
  CellQuadrature cells{};
  /// cells closer than this many cell diameters to the evaluation point are
  /// bisected recursively, up to `refine_depth` times
  double refine_radius = 1.5;
  int refine_depth = 4;
};

/// G mu(x) = integral of G(|x - y|) d mu(y), in R^N with N = mu.dim().
/// Returns +/-infinity when x sits on an atom (sign of its mass) or, in
/// space, on a charged curve.
double potential(const Measure& mu, const Point& x, const PotentialOptions& options = {});

/// Mean of G mu over the ball B_r(x), with mu extended by zero outside the
/// domain. Atoms use the closed-form averaged kernel; curves and densities
/// integrate the averaged kernel along their carrier.
double ball_average_potential(const Measure& mu, const Point& x, double r,
                              const PotentialOptions& options = {});

struct RatioScan {
  Point center = Point::Zero();
  std::vector<double> radii;
  std::vector<double> numerator_averages;
  std::vector<double> denominator_averages;
  std::vector<double> ratios;
};

/// Ball-average ratios (ball average of G nu) / (ball average of G mu) at x
/// over a strictly decreasing radius ladder. Requires mu, nu non-negative
/// and mutually singular; throws when a denominator vanishes.
RatioScan ratio_scan(const Measure& mu, const Measure& nu, const Point& x, const std::vector<double>& radii,
                     const PotentialOptions& options = {});

/// CSV with columns radius,num_avg,den_avg,ratio.
void write_csv(std::ostream& os, const RatioScan& scan);

/// 2^-from, 2^-(from+1), ..., 2^-to
std::vector<double> dyadic_radii(int from, int to);

} // namespace obstlab

#endif // OBSTLAB_POTENTIAL_HPP
