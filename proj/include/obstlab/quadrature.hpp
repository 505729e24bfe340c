#ifndef OBSTLAB_QUADRATURE_HPP
#define OBSTLAB_QUADRATURE_HPP

#include <functional>
#include <span>
#include <vector>

namespace obstlab {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule with `points` nodes (1 <= points <= 32).
const GaussRule& gauss_legendre(int points);

struct AdaptiveOptions {
  double abs_tolerance = 1e-10;
  int max_depth = 60;
  int points = 7;
};

/// Integral of f over [a, b], bisecting each panel until the panel estimate
/// and the sum of its two halves agree to the (depth-scaled) tolerance.
/// `breaks` are interior parameters where f is non-smooth; the integral is
/// split there before adaptation starts.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          std::span<const double> breaks = {},
                          const AdaptiveOptions& options = {});

} // namespace obstlab

#endif // OBSTLAB_QUADRATURE_HPP
