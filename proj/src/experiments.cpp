#include "obstlab/experiments.hpp"

#include "obstlab/obstacle.hpp"
#include "obstlab/potential.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace obstlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream ss(t);
  std::vector<std::string> out;
  for (std::string w; ss >> w;)
    out.push_back(w);
  return out;
}

double parse_double(const std::string& key, const std::string& v)
{
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

Point parse_point(const std::string& key, const std::string& v)
{
  const auto parts = split_list(v);
  if (parts.size() != 2)
    throw std::invalid_argument("config: " + key + " expects two coordinates");
  return Point(parse_double(key, parts[0]), parse_double(key, parts[1]), 0.0);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& v)
{
  std::vector<double> out;
  for (const std::string& w : split_list(v))
    out.push_back(parse_double(key, w));
  return out;
}

std::string join(const std::vector<double>& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + format_number(v[i]);
  return s;
}

Verdict make_verdict(std::string criterion, std::string clause, bool passed, double value, double threshold)
{
  return Verdict{std::move(criterion), std::move(clause), passed, value, threshold};
}

double sum_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().sum(); }

Grid unit_grid(int n) { return build_grid(Rectangle{}, n); }

ExperimentReport start_report(const ExperimentConfig& config)
{
  ExperimentReport r;
  r.experiment = config.experiment;
  r.provenance = config.echo();
  r.provenance.emplace_back("library", "obstlab 1.0");
  r.provenance.emplace_back("eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION));
  return r;
}

} // namespace

ExperimentConfig ExperimentConfig::defaults(const std::string& experiment)
{
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "delta")
    c.grid_sizes = {33, 65, 129};
  else if (experiment == "lostesso")
    c.grid_sizes = {32, 64};
  else if (experiment == "ratio") {
    c.grid_sizes = {32, 64, 128};
    c.radii = dyadic_radii(2, 10);
  } else if (experiment == "capacity")
    c.grid_sizes = {16, 32, 64, 128, 256};
  else
    throw std::invalid_argument("unknown experiment '" + experiment + "' (delta, lostesso, ratio, capacity)");
  return c;
}

void ExperimentConfig::set(const std::string& key, const std::string& value)
{
  if (key == "experiment")
    experiment = value;
  else if (key == "grid_sizes") {
    grid_sizes.clear();
    for (double v : parse_numbers(key, value)) {
      if (v != std::floor(v) || v < 4)
        throw std::invalid_argument("config: grid_sizes entries must be integers >= 4");
      grid_sizes.push_back(static_cast<int>(v));
    }
  } else if (key == "k")
    k = parse_double(key, value);
  else if (key == "y")
    y = parse_point(key, value);
  else if (key == "z")
    z = parse_point(key, value);
  else if (key == "coefficients")
    coefficients = value;
  else if (key == "radii") {
    // either an explicit list or pow2:a..b for 2^-a, ..., 2^-b
    if (value.rfind("pow2:", 0) == 0) {
      const std::string range = value.substr(5);
      const auto dots = range.find("..");
      if (dots == std::string::npos)
        throw std::invalid_argument("config: radii expects pow2:a..b");
      radii = dyadic_radii(static_cast<int>(parse_double(key, range.substr(0, dots))),
                           static_cast<int>(parse_double(key, range.substr(dots + 2))));
    } else
      radii = parse_numbers(key, value);
  } else if (key == "seed") {
    const double s = parse_double(key, value);
    if (s < 0 || s != std::floor(s))
      throw std::invalid_argument("config: seed must be a non-negative integer");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "output")
    output = value;
  else if (key == "omega")
    omega = parse_double(key, value);
  else if (key == "density")
    density = value;
  else if (key == "disk_radius")
    disk_radius = parse_double(key, value);
  else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

void ExperimentConfig::validate() const
{
  if (grid_sizes.empty())
    throw std::invalid_argument("config: grid_sizes is empty");
  for (std::size_t i = 1; i < grid_sizes.size(); ++i)
    if (grid_sizes[i] <= grid_sizes[i - 1])
      throw std::invalid_argument("config: grid_sizes must increase strictly");
  if (!(k > 0.0))
    throw std::invalid_argument("config: k must be positive");
  const Box unit = Box::unit(2);
  if (!unit.contains(y))
    throw std::invalid_argument("config: y must lie inside the unit square");
  if (!unit.contains(z))
    throw std::invalid_argument("config: z must lie inside the unit square");
  if (!(omega > 0.0 && omega < 2.0))
    throw std::invalid_argument("config: omega must lie in (0, 2)");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1])))
      throw std::invalid_argument("config: radii must be positive and strictly decreasing");
  if (!(disk_radius > 0.0))
    throw std::invalid_argument("config: disk_radius must be positive");
}

Summary ExperimentConfig::echo() const
{
  std::vector<double> sizes(grid_sizes.begin(), grid_sizes.end());
  return {{"experiment", experiment},
          {"grid_sizes", join(sizes)},
          {"k", format_number(k)},
          {"y", format_number(y[0]) + "," + format_number(y[1])},
          {"z", format_number(z[0]) + "," + format_number(z[1])},
          {"coefficients", coefficients},
          {"radii", join(radii)},
          {"seed", std::to_string(seed)},
          {"omega", format_number(omega)},
          {"density", density},
          {"disk_radius", format_number(disk_radius)}};
}

std::map<std::string, std::string> read_config(std::istream& is)
{
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(number) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file '" + path + "'");
  return read_config(in);
}

CoefficientField make_coefficients(const Grid& grid, const std::string& selector)
{
  const auto colon = selector.find(':');
  const std::string name = selector.substr(0, colon);
  const std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : parse_numbers("coefficients", selector.substr(colon + 1));
  auto expect = [&](std::size_t count) {
    if (args.size() != count)
      throw std::invalid_argument("coefficients: '" + name + "' takes " + std::to_string(count) + " values");
  };
  if (name == "identity") {
    expect(0);
    return CoefficientField::identity(grid);
  }
  if (name == "scalar") {
    expect(1);
    return CoefficientField::scalar(grid, args[0]);
  }
  if (name == "diagonal" || name == "matrix") {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    if (name == "diagonal") {
      expect(2);
      a.diagonal() << args[0], args[1];
    } else {
      expect(4);
      a << args[0], args[1], args[2], args[3];
    }
    const Eigen::Matrix2d sym = 0.5 * (a + a.transpose());
    const double beta = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sym).eigenvalues().minCoeff();
    if (!(beta > 0.0))
      throw std::invalid_argument("coefficients: matrix is not elliptic");
    return CoefficientField::sample(grid, [a](const Point&) { return a; }, beta);
  }
  if (name == "varying") {
    expect(0);
    return CoefficientField::sample(
        grid,
        [](const Point& x) {
          const double s = 1.0 + 0.5 * std::sin(2 * std::numbers::pi * x[0]) * std::sin(2 * std::numbers::pi * x[1]);
          return Eigen::Matrix2d(s * Eigen::Matrix2d::Identity());
        },
        0.5);
  }
  if (name == "skew") {
    // identity plus a skew part that varies with x, so the stiffness is not symmetric
    expect(0);
    return CoefficientField::sample(
        grid,
        [](const Point& x) {
          Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
          a(0, 1) = 0.6 * x[0];
          a(1, 0) = -0.6 * x[0];
          return a;
        },
        1.0);
  }
  throw std::invalid_argument("coefficients: unknown selector '" + selector + "'");
}

bool ExperimentReport::passed() const
{
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

const Verdict& ExperimentReport::verdict(const std::string& criterion) const
{
  for (const Verdict& v : verdicts)
    if (v.criterion == criterion)
      return v;
  throw std::out_of_range("no verdict '" + criterion + "'");
}

const Table& ExperimentReport::table(const std::string& name) const
{
  for (const Table& t : tables)
    if (t.name == name)
      return t;
  throw std::out_of_range("no table '" + name + "'");
}

void write_report(std::ostream& os, const ExperimentReport& report)
{
  os << "# report=" << report.experiment << '\n';
  for (const auto& [k, v] : report.provenance)
    os << "# config." << k << '=' << v << '\n';
  for (const Verdict& v : report.verdicts)
    os << "# verdict " << v.criterion << ' ' << (v.passed ? "PASS" : "FAIL") << " value=" << format_number(v.value)
       << " threshold=" << format_number(v.threshold) << " clause=" << v.clause << '\n';
  for (const std::string& n : report.notes)
    os << "# note " << n << '\n';
  os << "# overall=" << (report.passed() ? "PASS" : "FAIL") << '\n';
  for (const Table& t : report.tables) {
    os << "# table=" << t.name << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << format_number(row[i]);
      os << '\n';
    }
  }
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw std::invalid_argument("fit_line: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double res = 0;
  for (std::size_t i = 0; i < n; ++i)
    res += std::pow(y[i] - f.slope * x[i] - f.intercept, 2);
  f.r_squared = syy > 0 ? 1.0 - res / syy : 1.0;
  return f;
}

LineFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y)
{
  const std::size_t n = x.size();
  if (n < 1 || y.size() != n)
    throw std::invalid_argument("fit_through_origin: no points");
  double sxx = 0, sxy = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    my += y[i];
  }
  my /= n;
  LineFit f;
  f.slope = sxy / sxx;
  double res = 0, tot = 0, raw = 0;
  for (std::size_t i = 0; i < n; ++i) {
    res += std::pow(y[i] - f.slope * x[i], 2);
    tot += std::pow(y[i] - my, 2);
    raw += y[i] * y[i];
  }
  f.r_squared = tot > 0 ? 1.0 - res / tot : 1.0;
  f.r_squared_uncentered = raw > 0 ? 1.0 - res / raw : 1.0;
  return f;
}

double aitken_limit(double a0, double a1, double a2)
{
  const double d = a2 - 2 * a1 + a0;
  if (d == 0.0)
    return a2;
  return a2 - (a2 - a1) * (a2 - a1) / d;
}

ExperimentReport run_delta_refinement(const ExperimentConfig& config)
{
  config.validate();
  ExperimentReport report = start_report(config);
  Table levels{"levels",
               {"n", "h", "op_u_sup", "op_lambda0_l1", "op_singular_mass", "op_singular_offset", "naive_min_u",
                "naive_l1", "naive_reaction_near_y", "naive_reaction_total", "naive_iterations"},
               {}};
  LcpOptions opt;
  opt.omega = config.omega;
  const Box box = Box::unit(2);
  const Measure mu = dirac(box, config.y, -1.0);

  for (int n : config.grid_sizes) {
    const Grid grid = unit_grid(n);
    const EllipticOperator op = assemble(grid, make_coefficients(grid, config.coefficients));
    const Obstacle psi = Obstacle::constant(grid, -config.k);
    std::vector<double> row{double(n), grid.h()};
    try {
      const OpResult r = solve_op(op, mu, psi, opt);
      double mass = 0.0, offset = 0.0;
      for (const Atom& a : r.singular_reaction.atoms()) {
        mass += a.mass;
        offset = std::max(offset, (a.location - config.y).norm());
      }
      if (r.singular_reaction.atoms().size() != 1 || !r.singular_reaction.curves().empty() ||
          r.singular_reaction.diffuse())
        offset = kNaN;
      row.insert(row.end(), {r.u.lpNorm<Eigen::Infinity>(), sum_abs(r.lambda0), mass, offset});
    } catch (const SolverError& e) {
      report.notes.push_back("n=" + std::to_string(n) + " op arm: " + e.what());
      row.insert(row.end(), {kNaN, kNaN, kNaN, kNaN});
    }
    try {
      const LcpResult r = solve_naive(op, mu, psi, opt);
      double near = 0.0;
      const double radius = std::sqrt(grid.h());
      for (Index i = 0; i < r.u.size(); ++i)
        if ((grid.interior_position(i) - config.y).norm() <= radius)
          near += r.reaction[i];
      row.insert(row.end(),
                 {r.u.minCoeff(), l1_norm(grid, r.u), near, r.reaction.sum(), double(r.iterations)});
    } catch (const SolverError& e) {
      report.notes.push_back("n=" + std::to_string(n) + " naive arm: " + e.what());
      row.insert(row.end(), {kNaN, kNaN, kNaN, kNaN, kNaN});
    }
    levels.rows.push_back(row);
  }

  auto column = [&](int c) {
    std::vector<double> v;
    for (const auto& row : levels.rows)
      v.push_back(row[static_cast<std::size_t>(c)]);
    return v;
  };
  auto worst = [](const std::vector<double>& v, auto f) {
    double w = 0.0;
    for (double x : v) {
      const double e = f(x);
      w = std::isnan(e) || std::isnan(w) ? kNaN : std::max(w, e);
    }
    return w;
  };
  const double u_sup = worst(column(2), [](double x) { return x; });
  const double l0 = worst(column(3), [](double x) { return x; });
  const double sing = std::max(worst(column(4), [](double x) { return std::abs(x - 1.0); }),
                               worst(column(5), [](double x) { return x; }));
  report.verdicts.push_back(make_verdict("C1", "op arm sup|u| <= 1e-11 at every level", u_sup <= 1e-11, u_sup, 1e-11));
  report.verdicts.push_back(make_verdict("C1", "op arm |lambda0|_1 <= 1e-10 at every level", l0 <= 1e-10, l0, 1e-10));
  report.verdicts.push_back(
      make_verdict("C1", "singular reaction is the unit atom at y", sing <= 1e-14, sing, 1e-14));

  std::vector<double> mins;
  for (const auto& row : levels.rows)
    if (row[0] >= 32)
      mins.push_back(row[6]);
  const double min_dev = worst(mins, [&](double x) { return std::abs(x + config.k); });
  report.verdicts.push_back(
      make_verdict("C2", "naive min u = -k +- 1e-6 for n >= 32", !mins.empty() && min_dev <= 1e-6, min_dev, 1e-6));

  const std::vector<double> l1 = column(7);
  if (l1.size() >= 2) {
    const double change = std::abs(l1.back() - l1[l1.size() - 2]) / std::abs(l1[l1.size() - 2]);
    report.verdicts.push_back(
        make_verdict("C2", "naive L1 norm successive relative change < 10% at the last step", change < 0.10, change, 0.10));
  }
  if (l1.size() >= 3) {
    const double limit = aitken_limit(l1[l1.size() - 3], l1[l1.size() - 2], l1.back());
    report.verdicts.push_back(
        make_verdict("C2", "naive L1 norm limit > 0 (Aitken extrapolation)", limit > 0.0, limit, 0.0));
  }
  const std::vector<double> near = column(8);
  const double near_dev = near.empty() ? kNaN : std::abs(near.back() - 1.0);
  report.verdicts.push_back(make_verdict("delta.reaction-near-y",
                                         "naive reaction mass within sqrt(h) of y within 0.05 of 1 at the last level",
                                         near_dev <= 0.05, near_dev, 0.05));
  const double total_dev = worst(column(9), [](double x) { return std::abs(x - 1.0); });
  report.verdicts.push_back(make_verdict("delta.reaction-total", "naive reaction total mass within 0.02 of 1 at every level",
                                         total_dev <= 0.02, total_dev, 0.02));
  report.tables.push_back(std::move(levels));
  return report;
}

ExperimentReport run_lostesso(const ExperimentConfig& config)
{
  config.validate();
  if ((config.y - config.z).norm() == 0.0)
    throw std::invalid_argument("lostesso: z must differ from y");
  ExperimentReport report = start_report(config);
  Table levels{"levels",
               {"n", "h", "invariance_diff", "lambda0_min", "lambda0_mass", "comp_residual", "contact_nodes", "u_min",
                "u_max", "obstacle_max"},
               {}};
  LcpOptions opt;
  opt.omega = config.omega;
  const Box box = Box::unit(2);
  std::vector<std::string> tok = split_list(config.density);
  std::size_t pos = 0;
  const Density f = Density::parse(tok, pos, 2);
  if (pos != tok.size())
    throw std::invalid_argument("lostesso: trailing tokens in density");
  Measure mu(box);
  mu.add_density(f);
  if (!is_nonnegative(mu))
    throw std::invalid_argument("lostesso: density must be nonnegative");
  mu = mu - dirac(box, config.y);
  const Measure tau = dirac(box, config.z);
  const Measure sigma(box);

  double diff = 0.0, lmin = std::numeric_limits<double>::infinity(), comp = 0.0;
  for (int n : config.grid_sizes) {
    const Grid grid = unit_grid(n);
    const EllipticOperator op = assemble(grid, make_coefficients(grid, config.coefficients));
    const NodalFunction w = NodalFunction::Constant(grid.interior_count(), 0.1);
    const Obstacle psi = Obstacle::nodal(-solve_dirichlet(op, tau) - w, "-u_z-0.1");
    const ConditionReport cond = condition_check(psi, sigma, tau, w, op, mu);
    if (!cond.holds)
      throw std::runtime_error("lostesso: condition fails at node " + std::to_string(cond.node) + " (" + cond.side +
                               ", by " + format_number(cond.violation) + ")");
    const OpResult r1 = solve_op(op, mu, psi, opt);
    const OpResult r2 = solve_op(op, regularized_datum(mu), psi, opt);
    const double d = (r1.u - r2.u).lpNorm<Eigen::Infinity>();
    const double c = complementarity_residual(r1, psi, 10 * grid.h());
    int contact = 0;
    for (Index i = 0; i < r1.u.size(); ++i)
      contact += r1.u[i] == psi.values[i];
    levels.rows.push_back({double(n), grid.h(), d, r1.lambda0.minCoeff(), r1.lambda0.sum(), c, double(contact),
                           r1.u.minCoeff(), r1.u.maxCoeff(), psi.values.maxCoeff()});
    diff = std::max(diff, d);
    lmin = std::min(lmin, r1.lambda0.minCoeff());
    comp = std::max(comp, c);
  }
  report.verdicts.push_back(
      make_verdict("C3", "max nodal |u(mu) - u(mu+ - mu-_a)| <= 1e-11", diff <= 1e-11, diff, 1e-11));
  report.verdicts.push_back(make_verdict("lostesso.lambda0", "min lambda0 >= -1e-10", lmin >= -1e-10, lmin, -1e-10));
  report.verdicts.push_back(
      make_verdict("C4", "lambda0 mass on {u > psi + 10h} <= 1e-8", comp <= 1e-8, comp, 1e-8));
  report.tables.push_back(std::move(levels));
  return report;
}

ExperimentReport run_ratio_study(const ExperimentConfig& config)
{
  config.validate();
  ExperimentReport report = start_report(config);
  const std::vector<double> radii = config.radii.empty() ? dyadic_radii(2, 10) : config.radii;

  // mesh-free, N = 3: unit atom at the origin against a unit segment through it
  const Box space(3, Point(-1, -1, -1), Point(1, 1, 1));
  const Measure atom = dirac(space, Point::Zero());
  Measure segment(space);
  segment.add_curve({Point(-0.5, 0, 0), Point(0.5, 0, 0)}, 1.0);
  const RatioScan scan = ratio_scan(atom, segment, Point::Zero(), radii);
  Table t{"scan", {"radius", "num_avg", "den_avg", "ratio"}, {}};
  int increases = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    t.rows.push_back({radii[i], scan.numerator_averages[i], scan.denominator_averages[i], scan.ratios[i]});
    if (i > 0 && !(scan.ratios[i] < scan.ratios[i - 1]))
      ++increases;
  }
  report.tables.push_back(std::move(t));
  report.verdicts.push_back(
      make_verdict("C5", "ratio strictly decreasing along the ladder", increases == 0, increases, 0));
  const double decay = scan.ratios.back() / scan.ratios.front();
  report.verdicts.push_back(make_verdict("C5", "final/initial ratio < 0.05", decay < 0.05, decay, 0.05));

  // growth of ball averages at the atom versus a bounded density, r = 2^-2 .. 2^-12
  Measure bounded(space);
  bounded.add_density(Density::constant(1.0));
  Table probe{"probe", {"radius", "atom_avg", "density_avg"}, {}};
  for (double r : dyadic_radii(2, 12))
    probe.rows.push_back({r, ball_average_potential(atom, Point::Zero(), r),
                          ball_average_potential(bounded, Point::Zero(), r)});
  const double atom_growth = probe.rows.back()[1] / probe.rows.front()[1];
  const double density_growth = probe.rows.back()[2] / probe.rows.front()[2];
  report.tables.push_back(std::move(probe));
  report.verdicts.push_back(
      make_verdict("C6", "atom ball averages grow >= 10x from 2^-2 to 2^-12", atom_growth >= 10, atom_growth, 10));
  report.verdicts.push_back(make_verdict("C6", "bounded-density ball averages grow <= 2x", density_growth <= 2,
                                         density_growth, 2));

  // planar grid analog: averages over the nodes within 2h of y
  const Box box = Box::unit(2);
  std::vector<std::string> tok = split_list(config.density);
  std::size_t pos = 0;
  Measure smooth(box);
  smooth.add_density(Density::parse(tok, pos, 2));
  Table g{"grid", {"n", "h", "green_avg", "density_avg"}, {}};
  for (int n : config.grid_sizes) {
    const Grid grid = unit_grid(n);
    const EllipticOperator op = assemble(grid, make_coefficients(grid, config.coefficients));
    const NodalFunction green = discrete_green(op, config.y);
    const NodalFunction u = solve_dirichlet(op, smooth);
    const auto nodes = nodes_in_disk(grid, config.y, 2 * grid.h());
    double ga = 0, ua = 0;
    for (Index i : nodes) {
      ga += green[i];
      ua += u[i];
    }
    g.rows.push_back({double(n), grid.h(), ga / nodes.size(), ua / nodes.size()});
  }
  bool diverging = g.rows.size() >= 2;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i < g.rows.size(); ++i) {
    if (i > 0 && !(g.rows[i][2] > g.rows[i - 1][2]))
      diverging = false;
    lo = std::min(lo, std::abs(g.rows[i][3]));
    hi = std::max(hi, std::abs(g.rows[i][3]));
  }
  const double green_growth = g.rows.back()[2] / g.rows.front()[2];
  report.tables.push_back(std::move(g));
  report.verdicts.push_back(make_verdict("ratio.grid-green", "discrete Green averages at y increase with n", diverging,
                                         green_growth, 1));
  report.verdicts.push_back(make_verdict("ratio.grid-density", "bounded-density averages vary by at most 2x",
                                         hi <= 2 * lo, hi / lo, 2));
  return report;
}

ExperimentReport run_capacity_decay(const ExperimentConfig& config)
{
  config.validate();
  ExperimentReport report = start_report(config);
  Table t{"levels", {"n", "h", "abs_log_h", "cap_node", "cap_disk"}, {}};
  std::vector<double> x, inv, recip, cap;
  for (int n : config.grid_sizes) {
    const Grid grid = unit_grid(n);
    const double node = estimate_capacity(grid, {nearest_interior_node(grid, config.y)});
    const double disk = estimate_capacity(grid, nodes_in_disk(grid, config.y, config.disk_radius));
    const double L = std::abs(std::log(grid.h()));
    t.rows.push_back({double(n), grid.h(), L, node, disk});
    x.push_back(L);
    inv.push_back(1.0 / node);
    recip.push_back(1.0 / L);
    cap.push_back(node);
  }
  const std::size_t m = t.rows.size();
  if (m < 3)
    throw std::invalid_argument("capacity: need at least three grid sizes");

  // the verdict fits the pure model cap = c/|log h|; with no intercept the
  // R^2 is taken about zero. The centred score and a fit with an offset,
  // cap = c/(|log h| + b), go to the notes since the offset is large at these h.
  const LineFit plain = fit_through_origin(recip, cap);
  const LineFit shifted = fit_line(x, inv);
  report.notes.push_back("fit cap = c/|log h|: c=" + format_number(plain.slope) +
                         " r2_uncentered=" + format_number(plain.r_squared_uncentered) +
                         " r2_centered=" + format_number(plain.r_squared));
  report.notes.push_back("fit cap = c/(|log h| + b): c=" + format_number(1.0 / shifted.slope) +
                         " b=" + format_number(shifted.intercept / shifted.slope) +
                         " r2=" + format_number(shifted.r_squared));

  bool decreasing = true;
  for (std::size_t i = 1; i < m; ++i)
    decreasing = decreasing && t.rows[i][3] < t.rows[i - 1][3];
  report.verdicts.push_back(make_verdict("capacity.node-decreasing", "single-node capacity decreases with n", decreasing,
                                         t.rows.back()[3], t.rows.front()[3]));
  report.verdicts.push_back(
      make_verdict("C11", "single-node fit c/|log h| has R^2 > 0.99 (uncentered)", plain.r_squared_uncentered > 0.99,
                   plain.r_squared_uncentered, 0.99));
  const double rel = plain.slope / (2 * std::numbers::pi);
  report.verdicts.push_back(
      make_verdict("C11", "fitted c within 30% of 2 pi (value is c / 2 pi)", rel >= 0.7 && rel <= 1.3, rel, 0.3));
  const double change = std::abs(t.rows[m - 1][4] - t.rows[m - 2][4]) / t.rows[m - 1][4];
  report.verdicts.push_back(
      make_verdict("C11", "disk capacity final successive change < 2%", change < 0.02, change, 0.02));
  report.tables.push_back(std::move(t));
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config)
{
  if (config.experiment == "delta")
    return run_delta_refinement(config);
  if (config.experiment == "lostesso")
    return run_lostesso(config);
  if (config.experiment == "ratio")
    return run_ratio_study(config);
  if (config.experiment == "capacity")
    return run_capacity_decay(config);
  throw std::invalid_argument("unknown experiment '" + config.experiment + "'");
}

} // namespace obstlab
