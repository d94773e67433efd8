// transport-pinn: train | eval | reference | compare
//
// Exit codes: 0 success, 1 internal error, 2 invalid config / arguments /
// unreadable inputs, 3 non-finite loss, 4 reference solver did not
// converge, 5 grid mismatch in compare.

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "transport_pinn/transport_pinn.h"

namespace {

// Training allocates the same multi-megabyte blocks every step. Keeping them
// on the heap instead of fresh mmaps avoids page-fault churn.
void keep_large_blocks_on_heap() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

int exit_code(tpn_status status) {
  switch (status) {
    case TPN_OK:
      return 0;
    case TPN_ERR_INVALID_ARGUMENT:
    case TPN_ERR_INVALID_CONFIG:
    case TPN_ERR_IO:
      return 2;
    case TPN_ERR_NON_FINITE:
      return 3;
    case TPN_ERR_NOT_CONVERGED:
      return 4;
    case TPN_ERR_GRID_MISMATCH:
      return 5;
    case TPN_ERR_INTERNAL:
      break;
  }
  return 1;
}

int report(tpn_status status, const char* what) {
  if (status != TPN_OK) std::fprintf(stderr, "transport-pinn %s: %s\n", what, tpn_last_error());
  return exit_code(status);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct ConfigDeleter {
  void operator()(tpn_config* c) const { tpn_config_free(c); }
};
using ConfigPtr = std::unique_ptr<tpn_config, ConfigDeleter>;

// Loads the config and applies command-line overrides; nullptr on failure
// with the status in `status`.
ConfigPtr load_config(const std::string& path, const std::optional<long>& seed, const std::optional<double>& subsample,
                      const std::optional<std::string>& times, tpn_status& status) {
  tpn_config* raw = nullptr;
  status = tpn_config_load(path.c_str(), &raw);
  if (status != TPN_OK) return nullptr;
  ConfigPtr config(raw);
  if (seed) status = tpn_config_set(config.get(), "seed", std::to_string(*seed).c_str());
  if (status == TPN_OK && subsample) status = tpn_config_set(config.get(), "subsample", format_number(*subsample).c_str());
  if (status == TPN_OK && times) status = tpn_config_set(config.get(), "output_times", times->c_str());
  if (status != TPN_OK) return nullptr;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  keep_large_blocks_on_heap();
  CLI::App app{"Physics-informed network solver for slab linear transport"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tpn_version());

  std::string config_path, out_dir, checkpoint, dnn_dir, ref_dir;
  std::optional<long> seed;
  std::optional<double> subsample;
  std::optional<std::string> times;

  auto* train = app.add_subcommand("train", "Train the network on the configured problem");
  train->add_option("--config", config_path, "Run config file")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--subsample", subsample, "Fraction of (t, x) columns kept for training");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the output grid");
  eval->add_option("--config", config_path, "Run config file")->required();
  eval->add_option("--out", out_dir, "Output directory")->required();
  eval->add_option("--checkpoint", checkpoint, "Parameter file (default <out>/final.ckpt)");
  eval->add_option("--times", times, "Comma-separated snapshot times");

  auto* reference = app.add_subcommand("reference", "Run the discrete-ordinates reference solver");
  reference->add_option("--config", config_path, "Run config file")->required();
  reference->add_option("--out", out_dir, "Output directory")->required();
  reference->add_option("--times", times, "Comma-separated snapshot times");

  auto* compare = app.add_subcommand("compare", "Relative L2 errors between two field sets");
  compare->add_option("--dnn", dnn_dir, "Directory with network field files")->required();
  compare->add_option("--ref", ref_dir, "Directory with reference field files (omit to use the exact solution)");
  compare->add_option("--config", config_path, "Run config (needed for the exact solution)");
  compare->add_option("--out", out_dir, "Output directory for errors.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  tpn_status status = TPN_OK;
  if (*train) {
    auto config = load_config(config_path, seed, subsample, std::nullopt, status);
    if (!config) return report(status, "train");
    return report(tpn_train(config.get(), out_dir.c_str(), 0), "train");
  }
  if (*eval) {
    auto config = load_config(config_path, std::nullopt, std::nullopt, times, status);
    if (!config) return report(status, "eval");
    if (checkpoint.empty()) checkpoint = out_dir + "/final.ckpt";
    return report(tpn_eval(config.get(), checkpoint.c_str(), out_dir.c_str()), "eval");
  }
  if (*reference) {
    auto config = load_config(config_path, std::nullopt, std::nullopt, times, status);
    if (!config) return report(status, "reference");
    return report(tpn_reference(config.get(), out_dir.c_str()), "reference");
  }
  ConfigPtr config;
  if (!config_path.empty()) {
    config = load_config(config_path, std::nullopt, std::nullopt, std::nullopt, status);
    if (!config) return report(status, "compare");
  }
  return report(tpn_compare(config.get(), dnn_dir.c_str(), ref_dir.empty() ? nullptr : ref_dir.c_str(), out_dir.c_str()),
                "compare");
}
