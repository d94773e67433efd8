#include "transport.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace tpn {

double TransportProblem::inflow(double t, double x, double mu) const {
  const auto* in = std::get_if<InflowBoundary>(&boundary);
  require(in != nullptr, "inflow data requested for a problem with specular boundaries");
  return in->data(t, x, mu);
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::manufactured:
      return "manufactured";
    case ProblemKind::plane_source:
      return "plane_source";
    case ProblemKind::two_beam:
      return "two_beam";
  }
  return "unknown";
}

void validate_problem(const TransportProblem& problem) {
  require(std::isfinite(problem.sigma_s) && problem.sigma_s >= 0.0, "sigma_s must be finite and >= 0");
  require(std::isfinite(problem.sigma_a) && problem.sigma_a >= 0.0, "sigma_a must be finite and >= 0");
  require(problem.x_lo < problem.x_hi, "slab bounds must satisfy x_lo < x_hi");
  require(problem.t_end > 0.0, "t_end must be positive");
  require(static_cast<bool>(problem.source) && static_cast<bool>(problem.initial), "problem needs source and initial data");
  if (const auto* in = std::get_if<InflowBoundary>(&problem.boundary)) {
    require(static_cast<bool>(in->data), "inflow boundary needs data");
  }
}

TransportProblem manufactured_problem(double sigma_s, double sigma_a) {
  require(sigma_s >= 0.0 && sigma_a >= 0.0, "manufactured_problem: cross-sections must be >= 0");
  TransportProblem p;
  p.kind = ProblemKind::manufactured;
  p.sigma_s = sigma_s;
  p.sigma_a = sigma_a;
  p.x_lo = -5.0;
  p.x_hi = 5.0;
  p.t_end = 1.0;
  auto exact = [](double t, double x, double) { return std::exp(-(x - t) * (x - t)); };
  // Streaming of exp(-(x-t)^2) is 2(x-t)(1-mu) psi; the scattering terms
  // cancel because psi does not depend on mu.
  p.source = [sigma_a](double t, double x, double mu) {
    const double d = x - t;
    return (2.0 * d * (1.0 - mu) + sigma_a) * std::exp(-d * d);
  };
  p.initial = [exact](double x, double mu) { return exact(0.0, x, mu); };
  p.boundary = InflowBoundary{exact};
  p.exact = exact;
  return p;
}

TransportProblem plane_source_problem(double sigma_s, double sigma_a, double k) {
  require(sigma_s >= 0.0 && sigma_a >= 0.0, "plane_source_problem: cross-sections must be >= 0");
  require(k > 0.0 && std::isfinite(k), "plane_source_problem: k must be positive");
  TransportProblem p;
  p.kind = ProblemKind::plane_source;
  p.sigma_s = sigma_s;
  p.sigma_a = sigma_a;
  p.x_lo = -1.5;
  p.x_hi = 1.5;
  p.t_end = 1.0;
  const double norm = std::sqrt(k) / (std::erf(std::sqrt(k)) * std::sqrt(std::numbers::pi));
  p.source = [](double, double, double) { return 0.0; };
  p.initial = [k, norm](double x, double) { return std::exp(-k * x * x) * norm; };
  p.boundary = InflowBoundary{[](double, double, double) { return 0.0; }};
  return p;
}

TransportProblem two_beam_problem(double r) {
  require(r >= 0.0 && r <= 1.0, "two_beam_problem: scattering ratio must lie in [0, 1]");
  TransportProblem p;
  p.kind = ProblemKind::two_beam;
  p.sigma_s = 10.0 * r;
  p.sigma_a = 10.0 - p.sigma_s;
  p.x_lo = -1.0;
  p.x_hi = 1.0;
  p.t_end = 10.0;
  p.source = [](double, double, double) { return 0.0; };
  p.initial = [](double, double) { return 0.0; };
  p.boundary = InflowBoundary{[](double, double, double) { return 10.0; }};
  return p;
}

bool is_incoming(const TransportProblem& problem, double x, double mu) {
  return (x == problem.x_lo && mu > 0.0) || (x == problem.x_hi && mu < 0.0);
}

double pde_residual(const TransportProblem& problem, const Jet3& jet, double scatter_avg, double t, double x,
                    double mu) {
  return pde_residual_directional(problem, jet.value, jet.d_t + mu * jet.d_x, scatter_avg, t, x, mu);
}

double pde_residual_directional(const TransportProblem& problem, double value, double streaming, double scatter_avg,
                                double t, double x, double mu) {
  const double q = problem.source(t, x, mu);
  const double r = streaming + problem.sigma_t() * value - problem.sigma_s * scatter_avg - q;
  if (!std::isfinite(r)) {
    fail(ErrorCode::non_finite, "pde_residual: non-finite residual at (t, x, mu) = (" + std::to_string(t) + ", " +
                                    std::to_string(x) + ", " + std::to_string(mu) + ")");
  }
  return r;
}

}  // namespace tpn
