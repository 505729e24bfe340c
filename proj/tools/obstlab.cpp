// obstlab command-line front end.
#include "obstlab/experiments.hpp"
#include "obstlab/io.hpp"
#include "obstlab/obstacle.hpp"
#include "obstlab/potential.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace obstlab;

namespace {

Point parse_point(const std::string& text)
{
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream ss(t);
  Point p = Point::Zero();
  int i = 0;
  for (double v; ss >> v && i < 3;)
    p[i++] = v;
  if (i < 2 || !ss.eof())
    throw std::invalid_argument("bad point '" + text + "'");
  return p;
}

// Output stream for `path`, or stdout when empty.
class Sink {
public:
  explicit Sink(const std::string& path)
  {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_)
        throw std::runtime_error("cannot write '" + path + "'");
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }
  bool to_stdout() const { return !file_; }

private:
  std::unique_ptr<std::ofstream> file_;
};

Obstacle make_obstacle(const Grid& grid, const std::string& text)
{
  if (text == "none")
    return Obstacle::none(grid);
  if (text.rfind("const:", 0) == 0)
    return Obstacle::constant(grid, std::stod(text.substr(6)));
  throw std::invalid_argument("obstacle must be 'none' or 'const:<level>'");
}

void write_fields(std::ostream& os, const Grid& grid, const NodalFunction& u, const Eigen::VectorXd& lambda)
{
  os.precision(17);
  os << "# grid x0=" << grid.rect().x0 << " y0=" << grid.rect().y0 << " nx=" << grid.nx() << " ny=" << grid.ny()
     << " h=" << grid.h() << '\n';
  os << "x,y,u,lambda0\n";
  for (Index k = 0; k < u.size(); ++k) {
    const Point p = grid.interior_position(k);
    os << format_number(p[0]) << ',' << format_number(p[1]) << ',' << format_number(u[k]) << ','
       << format_number(lambda[k]) << '\n';
  }
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Obstacle problems with measure data on the unit square"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve OP(mu, psi) on a uniform grid; writes x,y,u,lambda0");
  std::string measure_path, obstacle = "none", coeff = "identity", output;
  int n = 32;
  double omega = 1.8;
  bool naive = false;
  solve->add_option("-m,--measure", measure_path, "measure file (empty measure when omitted)");
  solve->add_option("-n,--cells", n, "cells per side")->check(CLI::Range(4, 4096));
  solve->add_option("--obstacle", obstacle, "none | const:<level>");
  solve->add_option("--coefficients", coeff, "identity | scalar:c | diagonal:a,b | matrix:a11,a12,a21,a22 | varying | skew");
  solve->add_option("--omega", omega, "projected SOR relaxation");
  solve->add_flag("--naive", naive, "feed the whole datum to the LCP");
  solve->add_option("-o,--output", output, "CSV path (stdout when omitted)");

  // green
  auto* green = app.add_subcommand("green", "discrete Green function column and comparison bounds");
  std::string y_text = "0.5,0.5";
  green->add_option("-n,--cells", n, "cells per side")->check(CLI::Range(4, 4096));
  green->add_option("--y", y_text, "pole x,y");
  green->add_option("--coefficients", coeff, "coefficient selector");
  green->add_option("-o,--output", output, "CSV path (stdout when omitted)");

  // potential-scan
  auto* scan = app.add_subcommand("potential-scan", "ball-average ratio scan of two measures");
  std::string against_path, center_text = "0,0,0", radii_text = "pow2:2..10";
  scan->add_option("-m,--measure", measure_path, "denominator measure file")->required();
  scan->add_option("--against", against_path, "numerator measure file")->required();
  scan->add_option("--center", center_text, "scan centre");
  scan->add_option("--radii", radii_text, "pow2:a..b or a decreasing list");
  scan->add_option("-o,--output", output, "CSV path (stdout when omitted)");

  // capacity
  auto* cap = app.add_subcommand("capacity", "discrete capacity of a node or a disk");
  std::string centre = "0.5,0.5";
  double radius = 0.0;
  cap->add_option("-n,--cells", n, "cells per side")->check(CLI::Range(4, 4096));
  cap->add_option("--center", centre, "centre x,y");
  cap->add_option("--radius", radius, "disk radius; 0 picks the nearest node");

  // experiment
  auto* exp = app.add_subcommand("experiment", "refinement and ratio studies; exit 0 iff every verdict passes");
  std::string name, config_path;
  std::map<std::string, std::string> overrides;
  exp->add_option("name", name, "delta | lostesso | ratio | capacity");
  exp->add_option("-c,--config", config_path, "key = value file")->check(CLI::ExistingFile);
  for (const char* key : {"grid_sizes", "k", "y", "z", "coefficients", "radii", "seed", "output", "omega", "density",
                          "disk_radius"}) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    exp->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, std::string("override '") + key + "'");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*solve) {
      const Grid grid = build_grid(Rectangle{}, n);
      const EllipticOperator op = assemble(grid, make_coefficients(grid, coeff));
      const Measure mu = measure_path.empty() ? Measure(Box::unit(2)) : read_measure_file(measure_path);
      if (mu.dim() != 2)
        throw std::invalid_argument("solve works on planar measures");
      const Obstacle psi = make_obstacle(grid, obstacle);
      LcpOptions opt;
      opt.omega = omega;
      Summary s{{"cells", std::to_string(n)}, {"h", format_number(grid.h())}};
      Sink sink(output);
      if (naive) {
        const LcpResult r = solve_naive(op, mu, psi, opt);
        write_fields(sink.get(), grid, r.u, r.reaction);
        s.insert(s.end(), {{"arm", "naive"},
                           {"reaction_mass", format_number(r.reaction.sum())},
                           {"iterations", std::to_string(r.iterations)},
                           {"comp_residual", format_number(r.comp_residual)},
                           {"solver", r.solver}});
      } else {
        const OpResult r = solve_op(op, mu, psi, opt);
        write_fields(sink.get(), grid, r.u, r.lambda0);
        s.insert(s.end(), {{"arm", "op"},
                           {"lambda0_mass", format_number(r.lambda0.sum())},
                           {"singular_reaction_mass", format_number(total_mass(r.singular_reaction))},
                           {"singular_atoms", std::to_string(r.singular_reaction.atoms().size())},
                           {"iterations", std::to_string(r.lcp.iterations)},
                           {"comp_residual", format_number(r.lcp.comp_residual)},
                           {"solver", r.lcp.solver}});
      }
      write_summary(sink.to_stdout() ? std::cerr : std::cout, s);
      return 0;
    }
    if (*green) {
      const Grid grid = build_grid(Rectangle{}, n);
      const EllipticOperator op = assemble(grid, make_coefficients(grid, coeff));
      const NodalFunction g = discrete_green(op, parse_point(y_text));
      Sink sink(output);
      write_csv(sink.get(), grid, g, "green");
      const GreenBounds b = check_green_bounds(op, Rectangle{0.25, 0.25, 0.75, 0.75});
      write_summary(sink.to_stdout() ? std::cerr : std::cout,
                    {{"c1", format_number(b.c1)},
                     {"c2", format_number(b.c2)},
                     {"d1", format_number(b.d1)},
                     {"d2", format_number(b.d2)},
                     {"offset", format_number(b.offset)},
                     {"pairs", std::to_string(b.pairs)}});
      return 0;
    }
    if (*scan) {
      ExperimentConfig radii_holder;
      radii_holder.set("radii", radii_text);
      const Measure mu = read_measure_file(measure_path);
      const Measure nu = read_measure_file(against_path);
      const RatioScan r = ratio_scan(mu, nu, parse_point(center_text), radii_holder.radii);
      Sink sink(output);
      write_csv(sink.get(), r);
      return 0;
    }
    if (*cap) {
      const Grid grid = build_grid(Rectangle{}, n);
      const Point c = parse_point(centre);
      const std::vector<Index> E =
          radius > 0 ? nodes_in_disk(grid, c, radius) : std::vector<Index>{nearest_interior_node(grid, c)};
      write_summary(std::cout, {{"cells", std::to_string(n)},
                                {"nodes", std::to_string(E.size())},
                                {"capacity", format_number(estimate_capacity(grid, E))}});
      return 0;
    }
    if (*exp) {
      std::map<std::string, std::string> file = config_path.empty() ? std::map<std::string, std::string>{}
                                                                     : read_config_file(config_path);
      if (name.empty()) {
        if (!file.count("experiment"))
          throw std::invalid_argument("experiment name missing (positional or 'experiment' key)");
        name = file["experiment"];
      } else if (file.count("experiment") && file["experiment"] != name) {
        throw std::invalid_argument("config names experiment '" + file["experiment"] + "', command line '" + name + "'");
      }
      ExperimentConfig config = ExperimentConfig::defaults(name);
      for (const auto& [k, v] : file)
        if (k != "experiment")
          config.set(k, v);
      for (const auto& [k, v] : overrides)
        config.set(k, v);
      const ExperimentReport report = run_experiment(config);
      Sink sink(config.output);
      write_report(sink.get(), report);
      for (const Verdict& v : report.verdicts)
        std::cerr << (v.passed ? "PASS " : "FAIL ") << v.criterion << ": " << v.clause << " (" << format_number(v.value)
                  << ")\n";
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
