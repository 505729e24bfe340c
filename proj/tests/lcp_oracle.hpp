// Brute-force LCP reference: tries every active set.
#ifndef OBSTLAB_TESTS_LCP_ORACLE_HPP
#define OBSTLAB_TESTS_LCP_ORACLE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace oracle {

// Solves u >= psi, K u - m >= 0, (K u - m).(u - psi) = 0 by enumerating the
// 2^n candidate contact sets. psi entries of -inf are unconstrained and
// never enter the contact set. Returns the first consistent candidate.
inline Eigen::VectorXd enumerate_lcp(const Eigen::MatrixXd& K, const Eigen::VectorXd& m, const Eigen::VectorXd& psi,
                                     double tol = 1e-12)
{
  const int n = static_cast<int>(m.size());
  if (n > 20)
    throw std::invalid_argument("enumerate_lcp: too many unknowns");
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    bool skip = false;
    for (int i = 0; i < n; ++i)
      if ((mask >> i & 1u) && std::isinf(psi[i]))
        skip = true;
    if (skip)
      continue;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    std::vector<int> F;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1u)
        u[i] = psi[i];
      else
        F.push_back(i);
    }
    if (!F.empty()) {
      const int nf = static_cast<int>(F.size());
      Eigen::MatrixXd KFF(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        rhs[a] = m[F[a]];
        for (int j = 0; j < n; ++j)
          if (mask >> j & 1u)
            rhs[a] -= K(F[a], j) * psi[j];
        for (int b = 0; b < nf; ++b)
          KFF(a, b) = K(F[a], F[b]);
      }
      const Eigen::VectorXd uf = KFF.fullPivLu().solve(rhs);
      for (int a = 0; a < nf; ++a)
        u[F[a]] = uf[a];
    }
    const Eigen::VectorXd r = K * u - m;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (mask >> i & 1u)
        ok = r[i] >= -tol;
      else
        ok = std::isinf(psi[i]) || u[i] >= psi[i] - tol;
    }
    if (ok)
      return u;
  }
  throw std::runtime_error("enumerate_lcp: no consistent active set");
}

} // namespace oracle

#endif
