#ifndef OBSTLAB_OBSTACLE_HPP
#define OBSTLAB_OBSTACLE_HPP

#include "obstlab/grid.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace obstlab {

/// Nodal obstacle; -infinity marks an unconstrained node.
struct Obstacle {
  Eigen::VectorXd values;
  std::string tag;

  static constexpr double unconstrained_value = -std::numeric_limits<double>::infinity();

  static Obstacle constant(const Grid& grid, double level);
  static Obstacle none(const Grid& grid);
  static Obstacle sample(const Grid& grid, const std::function<double(const Point&)>& psi, std::string tag);
  static Obstacle nodal(Eigen::VectorXd values, std::string tag);

  bool constrained(Index k) const { return values[k] != unconstrained_value; }
};

struct LcpOptions {
  double omega = 1.8;
  double change_tolerance = 1e-11;
  double complementarity_tolerance = 1e-10;
  long max_iterations = 1'000'000;
  /// After the sweeps converge, re-solve exactly on the detected free set
  /// and keep the result if it stays feasible.
  bool polish = true;
};

struct LcpResult {
  NodalFunction u;
  /// stiffness * u - load, the nodal reaction masses
  Eigen::VectorXd reaction;
  long iterations = 0;
  double comp_residual = 0.0;
  std::string solver = "psor";
};

/// Thrown when projected SOR exhausts its iteration budget.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, long iterations, double last_change)
      : std::runtime_error(what), iterations(iterations), last_change(last_change)
  {
  }
  long iterations;
  double last_change;
};

/// max_i |reaction_i (u_i - psi_i)| over constrained nodes, combined with
/// max_i |reaction_i| over unconstrained ones.
double complementarity_gap(const Eigen::VectorXd& u, const Eigen::VectorXd& reaction, const Obstacle& psi);

/// Discrete variational inequality: u >= psi, K u - m >= 0, complementarity.
/// Projected SOR with lexicographic sweeps, started from the projection of
/// the unconstrained solution onto the constraint set.
LcpResult solve_lcp(const EllipticOperator& op, const Eigen::VectorXd& load, const Obstacle& psi,
                    const LcpOptions& options = {});

struct OpResult {
  NodalFunction u;
  /// regular reaction lambda_0 (nodal masses)
  Eigen::VectorXd lambda0;
  /// mu^-_s, echoed from the datum
  Measure singular_reaction;
  LcpResult lcp;
};

/// mu^+ - mu^-_a: the datum with its singular negative part removed.
Measure regularized_datum(const Measure& mu);

/// Obstacle problem with measure datum: solves the LCP for mu^+ - mu^-_a
/// and reports the reaction as lambda_0 + mu^-_s.
OpResult solve_op(const EllipticOperator& op, const Measure& mu, const Obstacle& psi, const LcpOptions& options = {});

/// Control arm: the whole datum, singular atoms included, as a nodal load.
LcpResult solve_naive(const EllipticOperator& op, const Measure& mu, const Obstacle& psi,
                      const LcpOptions& options = {});

/// Total reaction lambda_0 + mu^-_s as nodal masses (singular atoms spread by
/// their hat weights).
Eigen::VectorXd total_reaction(const Grid& grid, const OpResult& result);

/// lambda_0-mass on the nodes where u > psi + eps.
double complementarity_residual(const OpResult& result, const Obstacle& psi, double eps);

/// Worst nodal excess u - (u_reg + u_nu) over random non-negative nodal
/// measures nu scaled so that the candidate lies above psi.
double minimality_probe(const EllipticOperator& op, const Measure& mu, const Obstacle& psi, const OpResult& result,
                        int trials, std::uint64_t seed);

struct ConditionReport {
  bool holds = true;
  Index node = -1;      ///< first violated node
  std::string side;     ///< "lower" or "upper"
  double violation = 0.0;
};

/// Nodal check of -u_tau - u_sigma - w <= psi <= u_sigma. Throws if sigma
/// has a singular part or tau charges the singular negative part of datum.
ConditionReport condition_check(const Obstacle& psi, const Measure& sigma, const Measure& tau, const NodalFunction& w,
                                const EllipticOperator& op, const Measure& datum);

} // namespace obstlab

#endif // OBSTLAB_OBSTACLE_HPP
