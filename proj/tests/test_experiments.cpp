#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "obstlab/experiments.hpp"

#include <cmath>
#include <sstream>

using namespace obstlab;

TEST_CASE("config file parsing")
{
  std::istringstream in("# study\nk = 0.5\n  grid_sizes = 8, 16 ,32  # inline\n\ny=0.4,0.6\nk=0.25\n");
  const auto kv = read_config(in);
  CHECK(kv.at("k") == "0.25");
  CHECK(kv.at("grid_sizes") == "8, 16 ,32");
  ExperimentConfig c = ExperimentConfig::defaults("delta");
  CHECK(c.grid_sizes == std::vector<int>{33, 65, 129});
  for (const auto& [k, v] : kv)
    c.set(k, v);
  CHECK(c.k == 0.25);
  CHECK(c.grid_sizes == std::vector<int>{8, 16, 32});
  CHECK(c.y[1] == 0.6);
  c.validate();

  std::istringstream bad("k 0.5\n");
  CHECK_THROWS(read_config(bad));
  CHECK_THROWS(read_config_file("/nonexistent/obstlab.cfg"));
  CHECK_THROWS(c.set("colour", "blue"));
  CHECK_THROWS(c.set("k", "abc"));
  CHECK_THROWS(c.set("grid_sizes", "8,9.5"));
  CHECK_THROWS(ExperimentConfig::defaults("nonsense"));
}

TEST_CASE("config validation")
{
  ExperimentConfig c = ExperimentConfig::defaults("capacity");
  c.validate();
  c.set("grid_sizes", "16,16");
  CHECK_THROWS(c.validate());
  c = ExperimentConfig::defaults("capacity");
  c.set("k", "0");
  CHECK_THROWS(c.validate());
  c = ExperimentConfig::defaults("capacity");
  c.set("y", "1,0.5");
  CHECK_THROWS(c.validate());
  c = ExperimentConfig::defaults("ratio");
  c.set("radii", "pow2:3..5");
  CHECK(c.radii == std::vector<double>{0.125, 0.0625, 0.03125});
  c.set("radii", "0.1,0.2");
  CHECK_THROWS(c.validate());
}

TEST_CASE("least squares helpers")
{
  const std::vector<double> x{1, 2, 3, 4};
  const LineFit f = fit_line(x, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(f.r_squared == doctest::Approx(1));
  const LineFit o = fit_through_origin(x, {2, 4, 6, 8});
  CHECK(o.slope == doctest::Approx(2));
  CHECK(o.r_squared == doctest::Approx(1));
  // slope 7/3, SS_res = 2/3; SS about the mean 20, sum y^2 = 164
  const LineFit off = fit_through_origin(x, {3, 5, 7, 9});
  CHECK(off.slope == doctest::Approx(7.0 / 3));
  CHECK(off.r_squared == doctest::Approx(1 - 1.0 / 30));
  CHECK(off.r_squared_uncentered == doctest::Approx(1 - 1.0 / 246));
  // geometric sequence: Aitken is exact
  CHECK(aitken_limit(1 + 0.5, 1 + 0.25, 1 + 0.125) == doctest::Approx(1.0));
}

TEST_CASE("lostesso report is deterministic and passes")
{
  ExperimentConfig c = ExperimentConfig::defaults("lostesso");
  c.set("grid_sizes", "16,32");
  const ExperimentReport a = run_lostesso(c);
  const ExperimentReport b = run_lostesso(c);
  std::ostringstream sa, sb;
  write_report(sa, a);
  write_report(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a.passed());
  CHECK(a.verdict("C3").passed);
  CHECK(a.table("levels").rows.size() == 2);
  CHECK(sa.str().find("# verdict C4 PASS") != std::string::npos);

  c.set("z", "0.5,0.5");
  CHECK_THROWS(run_lostesso(c));
}

TEST_CASE("capacity experiment on a short ladder")
{
  ExperimentConfig c = ExperimentConfig::defaults("capacity");
  c.set("grid_sizes", "16,32,64");
  const ExperimentReport r = run_capacity_decay(c);
  const Table& t = r.table("levels");
  REQUIRE(t.rows.size() == 3);
  CHECK(r.verdict("capacity.node-decreasing").passed);
  CHECK(t.rows[2][3] < t.rows[0][3]);
}

TEST_CASE("delta experiment op arm")
{
  ExperimentConfig c = ExperimentConfig::defaults("delta");
  c.set("grid_sizes", "16,32");
  const ExperimentReport r = run_delta_refinement(c);
  CHECK(r.verdicts.front().criterion == "C1");
  CHECK(r.verdicts.front().passed);
  for (const auto& row : r.table("levels").rows)
    CHECK(row[2] == 0.0);
}

TEST_CASE("run_experiment dispatch")
{
  ExperimentConfig c = ExperimentConfig::defaults("ratio");
  c.set("grid_sizes", "16,32");
  c.set("radii", "pow2:2..6");
  const ExperimentReport r = run_experiment(c);
  CHECK(r.experiment == "ratio");
  CHECK(r.table("scan").rows.size() == 5);
  c.experiment = "other";
  CHECK_THROWS(run_experiment(c));
}
