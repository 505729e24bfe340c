#ifndef OBSTLAB_KERNELS_HPP
#define OBSTLAB_KERNELS_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obstlab {

inline void check_dimension(int dim)
{
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("dimension must be 2 or 3");
}

/// Fundamental solution of -Laplace in R^dim as a function of the distance r:
/// (1/2pi) log(1/r) in the plane, 1/(4 pi r) in space.
template <typename Scalar>
Scalar fundamental_solution(int dim, Scalar r)
{
  check_dimension(dim);
  if (!(r > Scalar(0)))
    throw std::invalid_argument("fundamental_solution: r must be positive");
  using std::log;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  if (dim == 2)
    return -log(r) / (Scalar(2) * pi);
  return Scalar(1) / (Scalar(4) * pi * r);
}

/// Mean of G(|y - z|) over y in a ball of radius r whose centre lies at
/// distance s from z. Equals G(s) outside the ball (mean value property of
/// harmonic functions), and the Newtonian/logarithmic potential of the
/// uniform ball inside it.
template <typename Scalar>
Scalar averaged_kernel(int dim, Scalar r, Scalar s)
{
  check_dimension(dim);
  if (!(r > Scalar(0)))
    throw std::invalid_argument("averaged_kernel: r must be positive");
  if (s < Scalar(0))
    throw std::invalid_argument("averaged_kernel: s must be non-negative");
  if (s >= r)
    return fundamental_solution(dim, s);
  using std::log;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar q = s / r;
  if (dim == 2)
    return (-log(r) + (Scalar(1) - q * q) / Scalar(2)) / (Scalar(2) * pi);
  return (Scalar(3) * r * r - s * s) / (Scalar(8) * pi * r * r * r);
}

} // namespace obstlab

#endif // OBSTLAB_KERNELS_HPP
