#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trainer.hpp"
#include "transport.hpp"

namespace tpn {

/// Experiment description read from a `key = value` file. See README for
/// the schema; unknown keys are rejected.
struct RunConfig {
  int schema_version = 1;
  ProblemKind problem = ProblemKind::manufactured;
  double sigma_s = 0.0;
  double sigma_a = 1.0;
  double k = 100.0;
  double r = 0.5;
  bool specular = false;

  int n_t = 50;
  int n_x = 100;
  int n_mu = 64;
  int n_ic = 200;
  int n_bc = 200;
  double subsample = 1.0;
  std::vector<int> layers;

  TrainConfig train;
  bool wall_time_in_history = false;

  std::vector<double> output_times;
  int grid_n_x = 400;
  int grid_n_mu = 100;
  double ref_dt = 1e-3;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one `key = value` assignment with the same rules as the file.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Throws Error(invalid_config) when any module precondition fails.
void validate_run_config(const RunConfig& config);

TransportProblem make_problem(const RunConfig& config);

/// Default snapshot times of each benchmark.
std::vector<double> default_output_times(ProblemKind kind);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace tpn
