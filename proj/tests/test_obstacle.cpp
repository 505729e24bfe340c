#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lcp_oracle.hpp"
#include "obstlab/experiments.hpp"
#include "obstlab/obstacle.hpp"

#include <cmath>
#include <random>

using namespace obstlab;

namespace {

const Box unit2 = Box::unit(2);
const Point y(0.5, 0.5, 0.0);

EllipticOperator make_op(int n, const std::string& coeff = "identity")
{
  const Grid g = build_grid(Rectangle{}, n);
  return assemble(g, make_coefficients(g, coeff));
}

Measure density(const Density& f)
{
  Measure m(unit2);
  m.add_density(f);
  return m;
}

void check_kkt(const LcpResult& r, const Eigen::VectorXd& load, const EllipticOperator& op, const Obstacle& psi)
{
  for (Index i = 0; i < r.u.size(); ++i) {
    if (psi.constrained(i))
      CHECK(r.u[i] >= psi.values[i] - 1e-12);
    CHECK(r.reaction[i] >= -1e-10);
  }
  CHECK((op.stiffness() * r.u - load - r.reaction).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.comp_residual <= 1e-10);
}

// a bump obstacle that touches a solution of f dx - delta_y somewhere
Obstacle bump(const Grid& g)
{
  return Obstacle::sample(
      g, [](const Point& p) { return 0.06 - 2.0 * ((p[0] - 0.3) * (p[0] - 0.3) + (p[1] - 0.6) * (p[1] - 0.6)); },
      "bump");
}

} // namespace

TEST_CASE("unconstrained obstacle reduces to the Dirichlet solve")
{
  const EllipticOperator op = make_op(16);
  const Measure mu = density(Density::sine_product(3.0)) - dirac(unit2, Point(0.3, 0.4, 0));
  const Eigen::VectorXd m = load_vector(op.grid(), mu);
  const LcpResult r = solve_lcp(op, m, Obstacle::none(op.grid()));
  CHECK((r.u - solve_dirichlet(op, mu)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(r.reaction.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero load with an obstacle below zero touching at one node")
{
  const EllipticOperator op = make_op(8);
  Eigen::VectorXd psi = Eigen::VectorXd::Constant(op.grid().interior_count(), -0.2);
  psi[10] = 0.0;
  const LcpResult r = solve_lcp(op, Eigen::VectorXd::Zero(psi.size()), Obstacle::nodal(psi, "dip"));
  CHECK(r.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.reaction.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projected SOR agrees with active-set enumeration")
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> s(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const EllipticOperator op = make_op(4, trial % 4 == 3 ? "skew" : (trial % 4 == 2 ? "varying" : "identity"));
    const Index n = op.grid().interior_count();
    REQUIRE(n == 9);
    const Eigen::VectorXd m = Eigen::VectorXd::NullaryExpr(n, [&] { return s(rng); });
    Eigen::VectorXd psi = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.3 * s(rng); });
    if (trial % 5 == 4)
      psi[4] = Obstacle::unconstrained_value;
    const Obstacle obs = Obstacle::nodal(psi, "random");
    const LcpResult r = solve_lcp(op, m, obs);
    const Eigen::VectorXd ref = oracle::enumerate_lcp(Eigen::MatrixXd(op.stiffness()), m, psi);
    CHECK((r.u - ref).cwiseAbs().maxCoeff() <= 1e-10);
    check_kkt(r, m, op, obs);
  }
}

TEST_CASE("enumeration agreement without the exact polish step")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(-1, 1);
  LcpOptions opt;
  opt.polish = false;
  const EllipticOperator op = make_op(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd m = Eigen::VectorXd::NullaryExpr(9, [&] { return s(rng); });
    const Eigen::VectorXd psi = Eigen::VectorXd::NullaryExpr(9, [&] { return 0.3 * s(rng); });
    const LcpResult r = solve_lcp(op, m, Obstacle::nodal(psi, "random"), opt);
    CHECK(r.solver == "psor");
    CHECK((r.u - oracle::enumerate_lcp(Eigen::MatrixXd(op.stiffness()), m, psi)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("solver errors")
{
  const EllipticOperator op = make_op(8);
  const Index n = op.grid().interior_count();
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(n);
  psi[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Obstacle::nodal(psi, "bad"), std::invalid_argument);
  psi[3] = std::nan("");
  CHECK_THROWS_AS(Obstacle::nodal(psi, "bad"), std::invalid_argument);

  LcpOptions opt;
  opt.max_iterations = 2;
  const Eigen::VectorXd m = load_vector(op.grid(), dirac(unit2, y, -1.0));
  CHECK_THROWS_AS(solve_lcp(op, m, Obstacle::constant(op.grid(), -0.05), opt), SolverError);
  opt.omega = 2.0;
  CHECK_THROWS_AS(solve_lcp(op, m, Obstacle::constant(op.grid(), -0.05), opt), std::invalid_argument);
  CHECK_THROWS_AS(solve_lcp(op, Eigen::VectorXd::Zero(3), Obstacle::none(op.grid())), std::invalid_argument);
}

TEST_CASE("negative point mass under a constant obstacle")
{
  for (int n : {32, 33}) {
    const EllipticOperator op = make_op(n);
    const Obstacle psi = Obstacle::constant(op.grid(), -0.35);
    const OpResult r = solve_op(op, dirac(unit2, y, -1.0), psi);
    CHECK(r.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.lambda0.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(r.singular_reaction.atoms().size() == 1);
    CHECK(r.singular_reaction.atoms()[0].mass == 1.0);
    CHECK(r.singular_reaction.atoms()[0].location == y);
    CHECK(complementarity_residual(r, psi, 10 * op.grid().h()) == 0.0);
    CHECK(total_reaction(op.grid(), r).sum() == doctest::Approx(1.0));

    const LcpResult naive = solve_naive(op, dirac(unit2, y, -1.0), psi);
    CHECK(naive.u.minCoeff() == doctest::Approx(-0.35).epsilon(1e-9));
    CHECK(naive.u.maxCoeff() <= 0.0);
  }
}

TEST_CASE("regular data pass straight through")
{
  const EllipticOperator op = make_op(24);
  const Obstacle psi = bump(op.grid());
  const Measure mu = density(Density::sine_product(1.0) + Density::constant(-0.5));
  const OpResult r = solve_op(op, mu, psi);
  const LcpResult direct = solve_lcp(op, load_vector(op.grid(), mu), psi);
  CHECK(r.u == direct.u);
  CHECK(r.singular_reaction.empty());
  const LcpResult naive = solve_naive(op, mu, psi);
  CHECK(naive.u == direct.u);
}

TEST_CASE("singular negative atoms do not change the solution")
{
  const EllipticOperator op = make_op(32);
  const Obstacle psi = Obstacle::constant(op.grid(), -0.35);
  const Measure f = density(Density::gaussian(1.5, Point(0.4, 0.5, 0), 0.15));
  const OpResult a = solve_op(op, f - dirac(unit2, y), psi);
  const OpResult b = solve_op(op, f, psi);
  CHECK((a.u - b.u).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK(a.singular_reaction.atoms().size() == 1);

  // positive atoms are kept: they are part of mu+
  const OpResult c = solve_op(op, f + dirac(unit2, Point(0.25, 0.25, 0), 0.5), psi);
  CHECK((c.u - b.u).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("contact problem: KKT, complementarity and minimality")
{
  const EllipticOperator op = make_op(32);
  const Obstacle psi = bump(op.grid());
  const Measure mu = density(Density::constant(-0.5)) - dirac(unit2, Point(0.7, 0.3, 0));
  const OpResult r = solve_op(op, mu, psi);
  const Eigen::VectorXd m = load_vector(op.grid(), regularized_datum(mu));
  check_kkt(r.lcp, m, op, psi);
  CHECK(r.lambda0.sum() > 1e-3); // the bump is active
  CHECK(complementarity_residual(r, psi, 10 * op.grid().h()) <= 1e-8);
  CHECK_THROWS(complementarity_residual(r, psi, 0.0));

  // nu = lambda0 reproduces u
  const NodalFunction u_reg = op.solve(m);
  CHECK((u_reg + op.solve(r.lambda0) - r.u).maxCoeff() <= 1e-10);
  // a larger nu gives a larger candidate
  Eigen::VectorXd more = r.lambda0;
  more[100] += 0.01;
  CHECK((r.u - (u_reg + op.solve(more))).maxCoeff() <= 1e-10);

  CHECK(minimality_probe(op, mu, psi, r, 50, 1234) <= 1e-9);
}

TEST_CASE("comparison principle")
{
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> s(-1, 1), pos(0, 1);
  for (const char* coeff : {"identity", "varying", "scalar:2.5"}) {
    const EllipticOperator op = make_op(16, coeff);
    const Index n = op.grid().interior_count();
    const Eigen::VectorXd m = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.01 * s(rng); });
    const Eigen::VectorXd psi1 = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.05 * s(rng); });
    const Eigen::VectorXd psi2 = psi1 + Eigen::VectorXd::NullaryExpr(n, [&] { return 0.02 * pos(rng); });
    const LcpResult a = solve_lcp(op, m, Obstacle::nodal(psi1, "1"));
    const LcpResult b = solve_lcp(op, m, Obstacle::nodal(psi2, "2"));
    CHECK((a.u - b.u).maxCoeff() <= 1e-10);
    const Eigen::VectorXd m2 = m + Eigen::VectorXd::NullaryExpr(n, [&] { return 0.01 * pos(rng); });
    const LcpResult c = solve_lcp(op, m2, Obstacle::nodal(psi1, "1"));
    CHECK((a.u - c.u).maxCoeff() <= 1e-10);
  }
}

TEST_CASE("condition check")
{
  const EllipticOperator op = make_op(32);
  const Grid& g = op.grid();
  const Index n = g.interior_count();
  const double k = 0.35;
  const Measure datum = dirac(unit2, y, -1.0);

  // constants: psi = -k, sigma = 50 dx, tau = 0, w = k
  Measure sigma(unit2);
  sigma.add_density(Density::constant(50.0));
  ConditionReport rep = condition_check(Obstacle::constant(g, -k), sigma, Measure(unit2),
                                        NodalFunction::Constant(n, k), op, datum);
  CHECK(rep.holds);

  // psi = u_sigma + h at one node breaks the upper bound
  Eigen::VectorXd psi = solve_dirichlet(op, sigma);
  psi[77] += 1e-3;
  rep = condition_check(Obstacle::nodal(psi, "above"), sigma, Measure(unit2), NodalFunction::Zero(n), op, datum);
  CHECK_FALSE(rep.holds);
  CHECK(rep.node == 77);
  CHECK(rep.side == "upper");

  // psi = -u_{delta_z} - 0.1 with tau = delta_z
  const Measure tau = dirac(unit2, Point(0.25, 0.25, 0));
  const NodalFunction w = NodalFunction::Constant(n, 0.1);
  const Obstacle obs = Obstacle::nodal(-solve_dirichlet(op, tau) - w, "well");
  CHECK(condition_check(obs, Measure(unit2), tau, w, op, datum).holds);

  // no obstacle: the lower bound cannot hold
  CHECK_FALSE(condition_check(Obstacle::none(g), Measure(unit2), tau, w, op, datum).holds);

  CHECK_THROWS(condition_check(obs, dirac(unit2, Point(0.3, 0.3, 0)), tau, w, op, datum));
  CHECK_THROWS(condition_check(obs, Measure(unit2), dirac(unit2, y), w, op, datum));
}

TEST_CASE("truncation energy bound on random data")
{
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.05, 0.95), s(-1, 1);
  for (const char* coeff : {"identity", "varying", "diagonal:2,0.5"}) {
    const EllipticOperator op = make_op(32, coeff);
    for (int t = 0; t < 4; ++t) {
      Measure mu(unit2);
      for (int a = 0; a < 3; ++a)
        mu.add_atom(Point(u(rng), u(rng), 0), s(rng));
      mu.add_density(Density::gaussian(s(rng), Point(u(rng), u(rng), 0), 0.1));
      const double k = 0.01 + 0.2 * u(rng);
      const NodalFunction sol = solve_dirichlet(op, mu);
      CHECK(truncation_energy(op, sol, k) <= k * total_variation(mu) * 1.01);
    }
  }
}
