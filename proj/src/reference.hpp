#pragma once

#include <string>
#include <vector>

#include "quadrature.hpp"
#include "transport.hpp"

namespace tpn {

/// Angular flux on a (time, cell, ordinate) lattice.
struct SolutionField {
  std::vector<double> times;
  std::vector<double> xs;  // cell centers (or evaluation abscissae)
  AngularGrid grid;
  std::vector<double> psi;  // [time][cell][ordinate], ordinate fastest
  std::string problem;
  double dx = 0.0;
  double dt = 0.0;

  std::size_t index(std::size_t time, std::size_t cell, std::size_t ordinate) const noexcept {
    return (time * xs.size() + cell) * grid.size() + ordinate;
  }
  double at(std::size_t time, std::size_t cell, std::size_t ordinate) const { return psi[index(time, cell, ordinate)]; }
};

/// Uniform cell centers of `n` cells on [lo, hi].
std::vector<double> cell_centers(double lo, double hi, int n);

struct SweepOptions {
  double tolerance = 1e-10;  // max change of the scalar flux, relative to max(1, |rho|)
  int max_sweeps = 200;
};

/// Discrete-ordinates solve: backward Euler in time, first-order upwind in
/// space, source iteration on the isotropic scattering term. Output time 0
/// returns the sampled initial condition.
SolutionField sn_solve(const TransportProblem& problem, int n_cells, const AngularGrid& grid, double dt,
                       const std::vector<double>& output_times, const SweepOptions& options = {});

/// rho[time][cell] = 1/2 sum_k w_k psi[time][cell][k].
std::vector<std::vector<double>> angular_average_field(const SolutionField& field);

/// dx * sum over cells of rho at one output time.
double total_mass(const SolutionField& field, std::size_t time_index);

}  // namespace tpn
