#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "error.hpp"
#include "fields_io.hpp"
#include "loss.hpp"

namespace tpn {

namespace fs = std::filesystem;

namespace {

void check_time_coverage(const RunConfig& config, const TransportProblem& problem) {
  for (double t : config.output_times) {
    require(t >= 0.0 && t <= problem.t_end, "output time " + std::to_string(t) + " outside [0, t_end]");
  }
}

SolutionField empty_field(const TransportProblem& problem, const RunConfig& config) {
  SolutionField field;
  field.times = config.output_times;
  field.xs = cell_centers(problem.x_lo, problem.x_hi, config.grid_n_x);
  field.grid = gauss_legendre(config.grid_n_mu);
  field.problem = to_string(problem.kind);
  field.dx = (problem.x_hi - problem.x_lo) / config.grid_n_x;
  field.psi.assign(field.times.size() * field.xs.size() * field.grid.size(), 0.0);
  return field;
}

}  // namespace

TrainResult run_train(const RunConfig& config, const fs::path& out_dir) {
  validate_run_config(config);
  const TransportProblem problem = make_problem(config);
  const AngularGrid grid = gauss_legendre(config.n_mu);
  const CollocationSet set = build_collocation(problem, config.n_t, config.n_x, grid, config.n_ic, config.n_bc,
                                               config.train.seed, config.subsample);
  NetworkParams init = init_params(config.layers, config.train.seed);

  fs::create_directories(out_dir);
  std::ofstream history(out_dir / "history.csv", std::ios::trunc);
  std::ofstream timing(out_dir / "timing.csv", std::ios::trunc);
  if (!history || !timing) fail(ErrorCode::io, "cannot write history in " + out_dir.string());
  write_history_header(history);
  timing << "step,wall_time_s\n";

  auto on_record = [&](const TrainRecord& record) {
    TrainRecord row = record;
    if (!config.wall_time_in_history) row.wall_time = 0.0;
    write_history_row(history, row);
    history.flush();
    timing << record.step << ',' << format_double(record.wall_time) << '\n';
    timing.flush();
  };
  auto on_checkpoint = [&](long step, const NetworkParams& params) {
    save_params(params, out_dir / ("checkpoint_" + std::to_string(step) + ".ckpt"));
  };

  TrainResult result = train(problem, set, std::move(init), config.train, on_checkpoint, on_record);
  save_params(result.params, out_dir / "final.ckpt");
  return result;
}

SolutionField evaluate_network(const NetworkParams& params, const TransportProblem& problem, const RunConfig& config) {
  validate_params(params);
  check_time_coverage(config, problem);
  SolutionField field = empty_field(problem, config);
  const auto n = static_cast<Eigen::Index>(field.xs.size());
  const auto m = static_cast<Eigen::Index>(field.grid.size());
  Points pts(3, n * m);
  for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < m; ++k) pts.col(i * m + k) << field.times[ti], field.xs[i], field.grid.nodes[k];
    const ForwardTape tape = forward_batch(params, pts);
    std::copy(tape.output().data(), tape.output().data() + n * m, field.psi.begin() + field.index(ti, 0, 0));
  }
  return field;
}

SolutionField evaluate_exact(const TransportProblem& problem, const RunConfig& config) {
  if (!problem.exact) fail(ErrorCode::invalid_config, "problem " + to_string(problem.kind) + " has no exact solution");
  check_time_coverage(config, problem);
  SolutionField field = empty_field(problem, config);
  for (std::size_t ti = 0; ti < field.times.size(); ++ti)
    for (std::size_t i = 0; i < field.xs.size(); ++i)
      for (std::size_t k = 0; k < field.grid.size(); ++k)
        field.psi[field.index(ti, i, k)] = (*problem.exact)(field.times[ti], field.xs[i], field.grid.nodes[k]);
  return field;
}

SolutionField run_eval(const RunConfig& config, const fs::path& checkpoint, const fs::path& out_dir) {
  validate_run_config(config);
  const NetworkParams params = load_params(checkpoint);
  if (params.layer_sizes != config.layers) {
    fail(ErrorCode::invalid_config, "checkpoint architecture does not match the config's layers");
  }
  const TransportProblem problem = make_problem(config);
  SolutionField field = evaluate_network(params, problem, config);
  write_field_files(out_dir, field);
  return field;
}

SolutionField run_reference(const RunConfig& config, const fs::path& out_dir) {
  validate_run_config(config);
  const TransportProblem problem = make_problem(config);
  SolutionField field = sn_solve(problem, config.grid_n_x, gauss_legendre(config.grid_n_mu), config.ref_dt,
                                 config.output_times);
  write_field_files(out_dir, field);
  return field;
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& weights) {
  require(a.size() == b.size() && a.size() == weights.size(), "relative_l2: size mismatch");
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    diff += weights[i] * d * d;
    ref += weights[i] * b[i] * b[i];
  }
  if (ref == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / ref);
}

std::vector<ErrorRow> run_compare(const fs::path& dnn_dir, const std::optional<fs::path>& ref_dir,
                                  const RunConfig* config, const fs::path& out_dir) {
  const auto dnn_files = list_psi_files(dnn_dir);
  if (dnn_files.empty()) fail(ErrorCode::io, "no psi_*.csv files in " + dnn_dir.string());

  std::optional<TransportProblem> exact_problem;
  std::map<std::string, fs::path> ref_files;
  if (ref_dir) {
    ref_files = list_psi_files(*ref_dir);
  } else {
    if (!config) fail(ErrorCode::invalid_config, "compare against the exact solution needs a config");
    exact_problem = make_problem(*config);
    if (!exact_problem->exact) {
      fail(ErrorCode::invalid_config, "no reference directory given and problem has no exact solution");
    }
  }

  std::vector<ErrorRow> rows;
  for (const auto& [label, dnn_path] : dnn_files) {
    const FieldSnapshot dnn = read_psi_file(dnn_path);
    FieldSnapshot ref;
    if (ref_dir) {
      const auto it = ref_files.find(label);
      if (it == ref_files.end()) continue;
      ref = read_psi_file(it->second);
      if (ref.xs.size() != dnn.xs.size() || ref.mus.size() != dnn.mus.size()) {
        fail(ErrorCode::grid_mismatch, "grid mismatch at t = " + label + ": " + std::to_string(dnn.xs.size()) + "x" +
                                           std::to_string(dnn.mus.size()) + " vs " + std::to_string(ref.xs.size()) +
                                           "x" + std::to_string(ref.mus.size()));
      }
      for (std::size_t i = 0; i < ref.xs.size(); ++i)
        if (std::abs(ref.xs[i] - dnn.xs[i]) > 1e-12 * std::max(1.0, std::abs(ref.xs[i])))
          fail(ErrorCode::grid_mismatch, "x grid mismatch at t = " + label);
      for (std::size_t k = 0; k < ref.mus.size(); ++k)
        if (std::abs(ref.mus[k] - dnn.mus[k]) > 1e-12) fail(ErrorCode::grid_mismatch, "mu grid mismatch at t = " + label);
    } else {
      ref = dnn;
      for (std::size_t i = 0; i < dnn.xs.size(); ++i)
        for (std::size_t k = 0; k < dnn.mus.size(); ++k)
          ref.psi[i * dnn.mus.size() + k] = (*exact_problem->exact)(dnn.t, dnn.xs[i], dnn.mus[k]);
    }

    // Quadrature weights in mu, uniform in x; the field must sit on Gauss nodes.
    const AngularGrid grid = gauss_legendre(static_cast<int>(dnn.mus.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (std::abs(grid.nodes[k] - dnn.mus[k]) > 1e-12) {
        fail(ErrorCode::grid_mismatch, "mu values at t = " + label + " are not Gauss-Legendre nodes");
      }
    }
    std::vector<double> weights(dnn.psi.size());
    std::vector<double> rho_dnn(dnn.xs.size()), rho_ref(dnn.xs.size());
    const std::size_t m = grid.size();
    for (std::size_t i = 0; i < dnn.xs.size(); ++i) {
      for (std::size_t k = 0; k < m; ++k) weights[i * m + k] = grid.weights[k];
      rho_dnn[i] = angular_average({dnn.psi.data() + i * m, m}, grid);
      rho_ref[i] = angular_average({ref.psi.data() + i * m, m}, grid);
    }
    const std::vector<double> ones(dnn.xs.size(), 1.0);
    rows.push_back({dnn.t, relative_l2(dnn.psi, ref.psi, weights), relative_l2(rho_dnn, rho_ref, ones)});
  }
  if (rows.empty()) fail(ErrorCode::grid_mismatch, "no common snapshot times between the two field sets");
  std::sort(rows.begin(), rows.end(), [](const ErrorRow& a, const ErrorRow& b) { return a.time < b.time; });

  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "errors.csv", std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write errors.csv in " + out_dir.string());
  out << "time,rel_l2_psi,rel_l2_rho\n";
  for (const auto& row : rows) {
    out << format_double(row.time) << ',' << format_double(row.rel_l2_psi) << ',' << format_double(row.rel_l2_rho)
        << '\n';
  }
  return rows;
}

}  // namespace tpn
