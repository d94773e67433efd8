#pragma once

#include <span>
#include <vector>

namespace tpn {

/// Gauss-Legendre rule on [-1, 1]. Nodes ascend; weights sum to 2.
struct AngularGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
/// Nodes come from Newton iteration on P_n started at the Tricomi guess.
AngularGrid gauss_legendre(int n);

/// Discrete angular average 1/2 * sum_j w_j f_j.
double angular_average(std::span<const double> values, const AngularGrid& grid);

}  // namespace tpn
