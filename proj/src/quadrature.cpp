#include "obstlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace obstlab {

namespace {

GaussRule make_rule(int points)
{
  GaussRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const int half = (points + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n starting from the Chebyshev guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (points == 1)
        p0 = 1.0, p1 = x;
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[points - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[points - 1 - i] = 0.5 * w;
  }
  if (points == 1) {
    rule.nodes[0] = 0.5;
    rule.weights[0] = 1.0;
  }
  return rule;
}

double panel(const std::function<double(double)>& f, double a, double b, const GaussRule& rule)
{
  double sum = 0.0;
  const double len = b - a;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(a + len * rule.nodes[i]);
  return sum * len;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole,
             double tol, int depth, const AdaptiveOptions& opt, const GaussRule& rule)
{
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid, rule);
  const double right = panel(f, mid, b, rule);
  if (depth >= opt.max_depth || std::abs(left + right - whole) <= tol)
    return left + right;
  return adapt(f, a, mid, left, 0.5 * tol, depth + 1, opt, rule)
       + adapt(f, mid, b, right, 0.5 * tol, depth + 1, opt, rule);
}

} // namespace

const GaussRule& gauss_legendre(int points)
{
  if (points < 1 || points > 32)
    throw std::invalid_argument("gauss_legendre: unsupported number of points");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it == cache.end())
    it = cache.emplace(points, make_rule(points)).first;
  return it->second;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          std::span<const double> breaks, const AdaptiveOptions& options)
{
  if (!(b > a))
    return 0.0;
  std::vector<double> cuts{a};
  for (double t : breaks)
    if (t > a && t < b)
      cuts.push_back(t);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const GaussRule& rule = gauss_legendre(options.points);
  const double tol = options.abs_tolerance / static_cast<double>(cuts.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double whole = panel(f, cuts[i], cuts[i + 1], rule);
    total += adapt(f, cuts[i], cuts[i + 1], whole, tol, 0, options, rule);
  }
  return total;
}

} // namespace obstlab
