#include "obstlab/obstacle.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>

namespace obstlab {

Obstacle Obstacle::constant(const Grid& grid, double level)
{
  return nodal(Eigen::VectorXd::Constant(grid.interior_count(), level), "constant");
}

Obstacle Obstacle::none(const Grid& grid)
{
  return nodal(Eigen::VectorXd::Constant(grid.interior_count(), unconstrained_value), "none");
}

Obstacle Obstacle::sample(const Grid& grid, const std::function<double(const Point&)>& psi, std::string tag)
{
  Eigen::VectorXd v(grid.interior_count());
  for (Index k = 0; k < v.size(); ++k)
    v[k] = psi(grid.interior_position(k));
  return nodal(std::move(v), std::move(tag));
}

Obstacle Obstacle::nodal(Eigen::VectorXd values, std::string tag)
{
  for (Index k = 0; k < values.size(); ++k)
    if (std::isnan(values[k]) || values[k] == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("obstacle: +infinity or NaN admits no feasible function");
  return Obstacle{std::move(values), std::move(tag)};
}

double complementarity_gap(const Eigen::VectorXd& u, const Eigen::VectorXd& reaction, const Obstacle& psi)
{
  double gap = 0.0;
  for (Index k = 0; k < u.size(); ++k) {
    const double term = psi.constrained(k) ? reaction[k] * (u[k] - psi.values[k]) : reaction[k];
    gap = std::max(gap, std::abs(term));
  }
  return gap;
}

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Exact solve with the nodes in `active` pinned to the obstacle.
bool polish(const EllipticOperator& op, const Eigen::VectorXd& load, const Obstacle& psi, Eigen::VectorXd& u)
{
  const SparseMatrix& K = op.stiffness();
  const Index n = u.size();
  std::vector<Index> free_index(static_cast<std::size_t>(n), -1);
  Index nf = 0;
  for (Index k = 0; k < n; ++k)
    if (!(psi.constrained(k) && u[k] == psi.values[k]))
      free_index[static_cast<std::size_t>(k)] = nf++;

  Eigen::VectorXd candidate = u;
  if (nf == n) {
    candidate = op.solve(load);
  } else if (nf > 0) {
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd rhs(nf);
    for (Index k = 0; k < n; ++k)
      if (free_index[static_cast<std::size_t>(k)] >= 0)
        rhs[free_index[static_cast<std::size_t>(k)]] = load[k];
    for (Index col = 0; col < K.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
        const Index r = free_index[static_cast<std::size_t>(it.row())];
        if (r < 0)
          continue;
        const Index c = free_index[static_cast<std::size_t>(it.col())];
        if (c >= 0)
          t.emplace_back(r, c, it.value());
        else
          rhs[r] -= it.value() * psi.values[it.col()];
      }
    SparseMatrix KFF(nf, nf);
    KFF.setFromTriplets(t.begin(), t.end());
    KFF.makeCompressed();
    Eigen::VectorXd uf;
    if (op.symmetric()) {
      Eigen::SimplicialLDLT<SparseMatrix> solver(KFF);
      if (solver.info() != Eigen::Success)
        return false;
      uf = solver.solve(rhs);
    } else {
      Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> solver(KFF);
      if (solver.info() != Eigen::Success)
        return false;
      uf = solver.solve(rhs);
    }
    for (Index k = 0; k < n; ++k)
      if (free_index[static_cast<std::size_t>(k)] >= 0)
        candidate[k] = uf[free_index[static_cast<std::size_t>(k)]];
  }

  const Eigen::VectorXd reaction = K * candidate - load;
  for (Index k = 0; k < n; ++k) {
    if (psi.constrained(k) && candidate[k] < psi.values[k] - 1e-12)
      return false;
    if (free_index[static_cast<std::size_t>(k)] < 0 && reaction[k] < -1e-10)
      return false;
  }
  u = candidate;
  return true;
}

} // namespace

LcpResult solve_lcp(const EllipticOperator& op, const Eigen::VectorXd& load, const Obstacle& psi,
                    const LcpOptions& options)
{
  const Index n = op.grid().interior_count();
  if (load.size() != n || psi.values.size() != n)
    throw std::invalid_argument("solve_lcp: size mismatch");
  if (!(options.omega > 0.0 && options.omega < 2.0))
    throw std::invalid_argument("solve_lcp: relaxation must lie in (0, 2)");
  Obstacle::nodal(psi.values, psi.tag); // validates

  const RowMatrix K = op.stiffness();
  Eigen::VectorXd diag(n);
  for (Index i = 0; i < n; ++i)
    diag[i] = K.coeff(i, i);

  LcpResult result;
  Eigen::VectorXd u = op.solve(load).cwiseMax(psi.values);
  const double w = options.omega;
  double change = 0.0;
  bool converged = false;
  for (long it = 1; it <= options.max_iterations; ++it) {
    change = 0.0;
    for (Index i = 0; i < n; ++i) {
      double off = 0.0;
      for (RowMatrix::InnerIterator e(K, i); e; ++e)
        if (e.col() != i)
          off += e.value() * u[e.col()];
      double next = (1.0 - w) * u[i] + w * (load[i] - off) / diag[i];
      if (psi.constrained(i))
        next = std::max(next, psi.values[i]);
      change = std::max(change, std::abs(next - u[i]));
      u[i] = next;
    }
    result.iterations = it;
    if (change < options.change_tolerance) {
      const Eigen::VectorXd reaction = op.stiffness() * u - load;
      if (complementarity_gap(u, reaction, psi) < options.complementarity_tolerance) {
        converged = true;
        break;
      }
    }
  }
  if (!converged)
    throw SolverError("solve_lcp: projected SOR did not converge", result.iterations, change);

  if (options.polish && polish(op, load, psi, u))
    result.solver = "psor+polish";
  result.u = std::move(u);
  result.reaction = op.stiffness() * result.u - load;
  result.comp_residual = complementarity_gap(result.u, result.reaction, psi);
  return result;
}

Measure regularized_datum(const Measure& mu)
{
  auto [plus, minus] = jordan_decompose(mu);
  return plus - capacity_decompose(minus).regular;
}

OpResult solve_op(const EllipticOperator& op, const Measure& mu, const Obstacle& psi, const LcpOptions& options)
{
  auto [plus, minus] = jordan_decompose(mu);
  MeasureDecomposition split = capacity_decompose(minus);
  const Measure datum = plus - split.regular;
  LcpResult lcp = solve_lcp(op, load_vector(op.grid(), datum), psi, options);
  OpResult out{lcp.u, lcp.reaction, std::move(split.singular), std::move(lcp)};
  return out;
}

LcpResult solve_naive(const EllipticOperator& op, const Measure& mu, const Obstacle& psi, const LcpOptions& options)
{
  LcpResult r = solve_lcp(op, load_vector(op.grid(), mu), psi, options);
  r.solver += ",naive";
  return r;
}

Eigen::VectorXd total_reaction(const Grid& grid, const OpResult& result)
{
  return result.lambda0 + load_vector(grid, result.singular_reaction);
}

double complementarity_residual(const OpResult& result, const Obstacle& psi, double eps)
{
  if (!(eps > 0.0))
    throw std::invalid_argument("complementarity_residual: eps must be positive");
  double mass = 0.0;
  for (Index k = 0; k < result.u.size(); ++k)
    if (!psi.constrained(k) || result.u[k] > psi.values[k] + eps)
      mass += std::abs(result.lambda0[k]);
  return mass;
}

double minimality_probe(const EllipticOperator& op, const Measure& mu, const Obstacle& psi, const OpResult& result,
                        int trials, std::uint64_t seed)
{
  const Grid& grid = op.grid();
  const Index n = grid.interior_count();
  const NodalFunction u_reg = op.solve(load_vector(grid, regularized_datum(mu)));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, n - 1);

  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
    if (trial % 2 == 0) {
      const int atoms = 1 + static_cast<int>(unit(rng) * 5);
      for (int a = 0; a < atoms; ++a)
        nu[pick(rng)] += 0.1 + unit(rng);
    } else {
      for (Index k = 0; k < n; ++k)
        nu[k] = unit(rng) * grid.lumped_mass();
    }
    const NodalFunction u_nu = op.solve(nu);
    double t = 0.0;
    bool admissible = true;
    for (Index k = 0; k < n; ++k) {
      if (!psi.constrained(k))
        continue;
      const double deficit = psi.values[k] - u_reg[k];
      if (deficit <= 0.0)
        continue;
      if (u_nu[k] <= 0.0) {
        admissible = false;
        break;
      }
      t = std::max(t, deficit / u_nu[k]);
    }
    if (!admissible)
      continue;
    // every third trial sits exactly on the admissibility threshold
    if (trial % 3 != 0)
      t *= 1.0 + 0.5 * unit(rng);
    const NodalFunction candidate = u_reg + t * u_nu;
    worst = std::max(worst, (result.u - candidate).maxCoeff());
  }
  return worst;
}

ConditionReport condition_check(const Obstacle& psi, const Measure& sigma, const Measure& tau, const NodalFunction& w,
                                const EllipticOperator& op, const Measure& datum)
{
  if (!capacity_decompose(sigma).singular.empty())
    throw std::invalid_argument("condition_check: sigma must charge no polar set");
  const Measure singular_negative = capacity_decompose(jordan_decompose(datum).second).singular;
  if (!mutually_singular(tau, singular_negative))
    throw std::invalid_argument("condition_check: tau must be singular to the singular negative part of the datum");
  const Index n = op.grid().interior_count();
  if (psi.values.size() != n || w.size() != n)
    throw std::invalid_argument("condition_check: size mismatch");

  const NodalFunction u_sigma = solve_dirichlet(op, sigma);
  const NodalFunction u_tau = solve_dirichlet(op, tau);
  constexpr double tol = 1e-12;
  ConditionReport report;
  for (Index k = 0; k < n; ++k) {
    const double lower = -u_tau[k] - u_sigma[k] - w[k];
    if (!(lower <= psi.values[k] + tol)) {
      report = {false, k, "lower", lower - psi.values[k]};
      break;
    }
    if (!(psi.values[k] <= u_sigma[k] + tol)) {
      report = {false, k, "upper", psi.values[k] - u_sigma[k]};
      break;
    }
  }
  return report;
}

} // namespace obstlab
