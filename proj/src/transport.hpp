#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "network.hpp"

namespace tpn {

using SpaceTimeAngleFn = std::function<double(double t, double x, double mu)>;
using SpaceAngleFn = std::function<double(double x, double mu)>;

/// Prescribed data h on the incoming boundary set: x = x_lo with mu > 0 and
/// x = x_hi with mu < 0.
struct InflowBoundary {
  SpaceTimeAngleFn data;
};

/// Mirror reflection psi(t, x, mu) = psi(t, x, -mu) on both faces.
struct SpecularBoundary {};

using BoundaryKind = std::variant<InflowBoundary, SpecularBoundary>;

enum class ProblemKind { manufactured, plane_source, two_beam };

/// Slab transport  d_t psi + mu d_x psi + sigma_t psi = sigma_s <psi> + Q
/// with particle speed 1 and isotropic scattering.
struct TransportProblem {
  ProblemKind kind = ProblemKind::manufactured;
  double sigma_s = 0.0;
  double sigma_a = 0.0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double t_end = 1.0;
  SpaceTimeAngleFn source;
  SpaceAngleFn initial;
  BoundaryKind boundary;
  /// Closed-form solution when one is known (manufactured problem only).
  std::optional<SpaceTimeAngleFn> exact;

  double sigma_t() const noexcept { return sigma_s + sigma_a; }
  bool specular() const noexcept { return std::holds_alternative<SpecularBoundary>(boundary); }
  /// Inflow data; only valid for InflowBoundary problems.
  double inflow(double t, double x, double mu) const;
};

std::string to_string(ProblemKind kind);

void validate_problem(const TransportProblem& problem);

/// Exact solution exp(-(x-t)^2) on x in (-5, 5), t in (0, 1), with the
/// source fitted to it and inflow data taken from it.
TransportProblem manufactured_problem(double sigma_s, double sigma_a);

/// Normalized Gaussian pulse exp(-k x^2) sqrt(k) / (erf(sqrt k) sqrt(pi)) on
/// (-1.5, 1.5), t in (0, 1], no source, vacuum inflow.
TransportProblem plane_source_problem(double sigma_s, double sigma_a, double k = 100.0);

/// Void slab [-1, 1] with isotropic inflow 10 on both faces, sigma_t = 10,
/// scattering ratio r, t in (0, 10].
TransportProblem two_beam_problem(double r);

/// True for (x, mu) on the incoming boundary set.
bool is_incoming(const TransportProblem& problem, double x, double mu);

/// Governing-equation residual d_t psi + mu d_x psi + sigma_t psi - sigma_s avg - Q.
double pde_residual(const TransportProblem& problem, const Jet3& jet, double scatter_avg, double t, double x, double mu);

/// Same residual from the directional derivative d_t psi + mu d_x psi.
double pde_residual_directional(const TransportProblem& problem, double value, double streaming, double scatter_avg,
                                double t, double x, double mu);

}  // namespace tpn
