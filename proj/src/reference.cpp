#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace tpn {

std::vector<double> cell_centers(double lo, double hi, int n) {
  require(n >= 1, "cell_centers: need at least one cell");
  const double h = (hi - lo) / n;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = lo + (i + 0.5) * h;
  return xs;
}

namespace {

struct Sweeper {
  const TransportProblem& problem;
  const AngularGrid& grid;
  const std::vector<double>& xs;
  double dx;

  // One transport sweep per ordinate for the step ending at `t`, with the
  // scattering source lagged at `rho`. psi_old is [cell][ordinate].
  void sweep(double t, double dt, const std::vector<double>& psi_old, const std::vector<double>& rho,
             std::vector<double>& psi) const {
    const std::size_t n = xs.size();
    const std::size_t m = grid.size();
    const double inv_dt = 1.0 / dt;
    const double sigma_t = problem.sigma_t();
    const double sigma_s = problem.sigma_s;
    const bool specular = problem.specular();

    auto rhs = [&](std::size_t i, std::size_t k) {
      return psi_old[i * m + k] * inv_dt + sigma_s * rho[i] + problem.source(t, xs[i], grid.nodes[k]);
    };

    // Leftward ordinates first; under specular reflection their ghost value
    // at x_hi comes from the mirrored rightward ordinate of the last iterate,
    // and the rightward sweep then sees the fresh leftward values at x_lo.
    for (std::size_t k = 0; k < m; ++k) {
      const double mu = grid.nodes[k];
      if (mu >= 0.0) continue;
      const double a = -mu / dx;
      const double diag = inv_dt + a + sigma_t;
      double upstream = specular ? psi[(n - 1) * m + (m - 1 - k)] : problem.inflow(t, problem.x_hi, mu);
      for (std::size_t i = n; i-- > 0;) {
        const double v = (rhs(i, k) + a * upstream) / diag;
        psi[i * m + k] = v;
        upstream = v;
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double mu = grid.nodes[k];
      if (mu < 0.0) continue;
      const double a = mu / dx;
      const double diag = inv_dt + a + sigma_t;
      double upstream = specular ? psi[m - 1 - k] : (mu > 0.0 ? problem.inflow(t, problem.x_lo, mu) : 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double v = (rhs(i, k) + a * upstream) / diag;
        psi[i * m + k] = v;
        upstream = v;
      }
    }
  }

  void scalar_flux(const std::vector<double>& psi, std::vector<double>& rho) const {
    const std::size_t m = grid.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += grid.weights[k] * psi[i * m + k];
      rho[i] = 0.5 * s;
    }
  }
};

}  // namespace

SolutionField sn_solve(const TransportProblem& problem, int n_cells, const AngularGrid& grid, double dt,
                       const std::vector<double>& output_times, const SweepOptions& options) {
  validate_problem(problem);
  require(n_cells >= 1, "sn_solve: n_cells must be >= 1");
  require(dt > 0.0 && std::isfinite(dt), "sn_solve: dt must be positive");
  require(grid.size() >= 1, "sn_solve: empty angular grid");
  require(!output_times.empty(), "sn_solve: no output times");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    require(output_times[i] >= 0.0 && output_times[i] <= problem.t_end * (1.0 + 1e-12),
            "sn_solve: output time " + std::to_string(output_times[i]) + " outside [0, t_end]");
    require(i == 0 || output_times[i] > output_times[i - 1], "sn_solve: output times must increase");
  }

  SolutionField field;
  field.times = output_times;
  field.xs = cell_centers(problem.x_lo, problem.x_hi, n_cells);
  field.grid = grid;
  field.problem = to_string(problem.kind);
  field.dx = (problem.x_hi - problem.x_lo) / n_cells;
  field.dt = dt;
  const std::size_t n = field.xs.size();
  const std::size_t m = grid.size();
  field.psi.assign(output_times.size() * n * m, 0.0);

  std::vector<double> psi(n * m), psi_old(n * m), rho(n), rho_new(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) psi[i * m + k] = problem.initial(field.xs[i], grid.nodes[k]);

  const Sweeper sweeper{problem, grid, field.xs, field.dx};
  double t = 0.0;
  for (std::size_t out = 0; out < output_times.size(); ++out) {
    const double target = output_times[out];
    while (t < target - 1e-12 * std::max(1.0, target)) {
      double step = std::min(dt, target - t);
      // Avoid a sliver step from accumulated rounding.
      if (target - (t + step) < 1e-9 * dt) step = target - t;
      const double t_next = (step == target - t) ? target : t + step;

      psi_old = psi;
      sweeper.scalar_flux(psi_old, rho);
      int sweeps = 0;
      double change = 0.0;
      for (;;) {
        sweeper.sweep(t_next, step, psi_old, rho, psi);
        ++sweeps;
        sweeper.scalar_flux(psi, rho_new);
        change = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          change = std::max(change, std::abs(rho_new[i] - rho[i]));
          scale = std::max(scale, std::abs(rho_new[i]));
        }
        rho.swap(rho_new);
        if (!std::isfinite(change)) {
          fail(ErrorCode::not_converged, "sn_solve: non-finite scalar flux at t = " + std::to_string(t_next));
        }
        // Without scattering or reflection one sweep is exact.
        if ((problem.sigma_s == 0.0 && !problem.specular()) || change <= options.tolerance * scale) break;
        if (sweeps >= options.max_sweeps) {
          fail(ErrorCode::not_converged, "sn_solve: source iteration did not converge at t = " +
                                             std::to_string(t_next) + " after " + std::to_string(sweeps) +
                                             " sweeps (residual " + std::to_string(change) + ")");
        }
      }
      t = t_next;
    }
    std::copy(psi.begin(), psi.end(), field.psi.begin() + static_cast<std::ptrdiff_t>(out * n * m));
  }
  return field;
}

std::vector<std::vector<double>> angular_average_field(const SolutionField& field) {
  const std::size_t n = field.xs.size();
  const std::size_t m = field.grid.size();
  require(field.psi.size() == field.times.size() * n * m, "angular_average_field: shape mismatch");
  std::vector<std::vector<double>> rho(field.times.size(), std::vector<double>(n));
  for (std::size_t ti = 0; ti < field.times.size(); ++ti)
    for (std::size_t i = 0; i < n; ++i)
      rho[ti][i] = angular_average({field.psi.data() + field.index(ti, i, 0), m}, field.grid);
  return rho;
}

double total_mass(const SolutionField& field, std::size_t time_index) {
  require(time_index < field.times.size(), "total_mass: time index " + std::to_string(time_index) + " out of range");
  const std::size_t n = field.xs.size();
  const std::size_t m = field.grid.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += angular_average({field.psi.data() + field.index(time_index, i, 0), m}, field.grid);
  return field.dx * sum;
}

}  // namespace tpn
