#ifndef OBSTLAB_EXPERIMENTS_HPP
#define OBSTLAB_EXPERIMENTS_HPP

#include "obstlab/grid.hpp"
#include "obstlab/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace obstlab {

struct ExperimentConfig {
  std::string experiment = "delta";
  std::vector<int> grid_sizes;
  double k = 0.35;
  Point y = Point(0.5, 0.5, 0.0);
  Point z = Point(0.25, 0.25, 0.0);
  /// identity | scalar:c | diagonal:a11,a22 | matrix:a11,a12,a21,a22 | varying | skew
  std::string coefficients = "identity";
  std::vector<double> radii;
  std::uint64_t seed = 20240601;
  std::string output;
  double omega = 1.8;
  /// nonnegative f of the f dx - delta_y datum
  std::string density = "sine 1";
  double disk_radius = 0.2;

  /// Default grid sizes and radii for the named experiment.
  static ExperimentConfig defaults(const std::string& experiment);
  /// Sets one key from its text value; throws on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Throws unless sizes increase strictly, k > 0 and y lies inside the unit square.
  void validate() const;
  /// key=value echo of every field.
  Summary echo() const;
};

/// Reads `key = value` lines ('#' comments) into a map, keeping the last
/// value of a repeated key.
std::map<std::string, std::string> read_config(std::istream& is);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Builds the coefficient field named by `selector` on `grid`.
CoefficientField make_coefficients(const Grid& grid, const std::string& selector);

struct Verdict {
  std::string criterion; ///< e.g. "C1" or "delta.reaction-total"
  std::string clause;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string experiment;
  Summary provenance;
  std::vector<Table> tables;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  bool passed() const;
  const Verdict& verdict(const std::string& criterion) const;
  const Table& table(const std::string& name) const;
};

/// CSV with '#' metadata lines: provenance, verdicts, notes, then one block
/// per table. Numbers use the shortest round-trip form.
void write_report(std::ostream& os, const ExperimentReport& report);

ExperimentReport run_delta_refinement(const ExperimentConfig& config);
ExperimentReport run_lostesso(const ExperimentConfig& config);
ExperimentReport run_ratio_study(const ExperimentConfig& config);
ExperimentReport run_capacity_decay(const ExperimentConfig& config);
/// Dispatches on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// 1 - SS_res / sum y^2; the usual score for a fit without intercept
  double r_squared_uncentered = 0.0;
};
/// Least squares y = slope x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Least squares y = slope x through the origin; r_squared is taken about
/// the mean of y, r_squared_uncentered about zero.
LineFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

/// Aitken delta-squared extrapolation of the last three terms.
double aitken_limit(double a0, double a1, double a2);

} // namespace obstlab

#endif // OBSTLAB_EXPERIMENTS_HPP
