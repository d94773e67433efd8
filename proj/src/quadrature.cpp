#include "quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace tpn {

namespace {

constexpr double newton_tol = 1e-15;
constexpr int newton_max_iter = 100;

// Returns P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

AngularGrid gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n must be >= 1, got " + std::to_string(n));

  AngularGrid grid;
  grid.nodes.assign(n, 0.0);
  grid.weights.assign(n, 0.0);
  if (n == 1) {
    grid.weights[0] = 2.0;
    return grid;
  }

  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi asymptotic guess for the i-th largest root.
    const double theta = std::numbers::pi * (4.0 * i + 3.0) / (4.0 * n + 2.0);
    double x = (1.0 - (n - 1.0) / (8.0 * n * n * n)) * std::cos(theta);

    double dp = 0.0;
    bool converged = false;
    for (int iter = 0; iter < newton_max_iter; ++iter) {
      auto [p, d] = legendre_with_derivative(n, x);
      const double dx = p / d;
      x -= dx;
      dp = d;
      if (std::abs(dx) <= newton_tol) {
        converged = true;
        break;
      }
    }
    if (!converged || !std::isfinite(x)) {
      fail(ErrorCode::not_converged, "gauss_legendre: Newton iteration did not converge for node " +
                                         std::to_string(i) + " of n=" + std::to_string(n));
    }
    dp = legendre_with_derivative(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);

    // Largest roots first from the guess; store ascending and mirrored.
    grid.nodes[n - 1 - i] = x;
    grid.nodes[i] = -x;
    grid.weights[n - 1 - i] = w;
    grid.weights[i] = w;
  }
  if (n % 2 == 1) grid.nodes[n / 2] = 0.0;
  return grid;
}

double angular_average(std::span<const double> values, const AngularGrid& grid) {
  require(values.size() == grid.size(), "angular_average: expected " + std::to_string(grid.size()) +
                                            " values, got " + std::to_string(values.size()));
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) sum += grid.weights[j] * values[j];
  return 0.5 * sum;
}

}  // namespace tpn
