#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "config.hpp"
#include "network.hpp"
#include "reference.hpp"

namespace tpn {

/// Trains per `config`; writes history.csv, checkpoint_<step>.ckpt and
/// final.ckpt (plus timing.csv) into out_dir. history.csv is flushed row by
/// row so an aborted run keeps its trajectory.
TrainResult run_train(const RunConfig& config, const std::filesystem::path& out_dir);

/// Network values on the evaluation lattice: `grid_n_x` cell centers of the
/// slab times `grid_n_mu` quadrature nodes, at each output time.
SolutionField evaluate_network(const NetworkParams& params, const TransportProblem& problem, const RunConfig& config);

/// The closed-form solution sampled on the same lattice (manufactured only).
SolutionField evaluate_exact(const TransportProblem& problem, const RunConfig& config);

SolutionField run_eval(const RunConfig& config, const std::filesystem::path& checkpoint,
                       const std::filesystem::path& out_dir);

SolutionField run_reference(const RunConfig& config, const std::filesystem::path& out_dir);

struct ErrorRow {
  double time = 0.0;
  double rel_l2_psi = 0.0;
  double rel_l2_rho = 0.0;
};

/// Relative L2 errors of `dnn_dir` fields against `ref_dir` fields, or
/// against the exact solution when ref_dir is empty (manufactured config
/// required). Writes errors.csv into out_dir.
std::vector<ErrorRow> run_compare(const std::filesystem::path& dnn_dir, const std::optional<std::filesystem::path>& ref_dir,
                                  const RunConfig* config, const std::filesystem::path& out_dir);

/// ||a - b|| / ||b|| with weights; 0 when both vanish, inf when only b does.
double relative_l2(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& weights);

}  // namespace tpn
