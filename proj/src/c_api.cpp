#include "transport_pinn/transport_pinn.h"

#include <exception>
#include <new>
#include <string>

#include "commands.hpp"
#include "error.hpp"
#include "parallel.hpp"

struct tpn_config {
  tpn::RunConfig value;
};

struct tpn_network {
  tpn::NetworkParams value;
};

namespace {

thread_local std::string last_error;

tpn_status to_status(tpn::ErrorCode code) {
  switch (code) {
    case tpn::ErrorCode::invalid_argument:
      return TPN_ERR_INVALID_ARGUMENT;
    case tpn::ErrorCode::invalid_config:
      return TPN_ERR_INVALID_CONFIG;
    case tpn::ErrorCode::non_finite:
      return TPN_ERR_NON_FINITE;
    case tpn::ErrorCode::not_converged:
      return TPN_ERR_NOT_CONVERGED;
    case tpn::ErrorCode::grid_mismatch:
      return TPN_ERR_GRID_MISMATCH;
    case tpn::ErrorCode::io:
      return TPN_ERR_IO;
  }
  return TPN_ERR_INTERNAL;
}

template <class F>
tpn_status guarded(F&& f) {
  try {
    f();
    return TPN_OK;
  } catch (const tpn::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TPN_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TPN_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return TPN_ERR_INTERNAL;
  }
}

tpn_status null_argument(const char* name) {
  last_error = std::string("null argument: ") + name;
  return TPN_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* tpn_version(void) { return "1.0.0"; }

const char* tpn_last_error(void) { return last_error.c_str(); }

int tpn_default_threads(void) { return tpn::default_thread_count(); }

tpn_status tpn_config_load(const char* path, tpn_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tpn_config{tpn::load_run_config(path)}; });
}

tpn_status tpn_config_parse(const char* text, tpn_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tpn_config{tpn::parse_run_config(text)}; });
}

tpn_status tpn_config_set(tpn_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key || !value) return null_argument("key/value");
  return guarded([&] {
    tpn::RunConfig updated = config->value;
    tpn::set_config_value(updated, key, value);
    tpn::validate_run_config(updated);
    config->value = std::move(updated);
  });
}

void tpn_config_free(tpn_config* config) { delete config; }

tpn_status tpn_train(const tpn_config* config, const char* out_dir, int threads) {
  if (!config) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] {
    tpn::RunConfig run = config->value;
    run.train.threads = threads > 0 ? threads : tpn::default_thread_count();
    tpn::run_train(run, out_dir);
  });
}

tpn_status tpn_eval(const tpn_config* config, const char* checkpoint, const char* out_dir) {
  if (!config) return null_argument("config");
  if (!checkpoint) return null_argument("checkpoint");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] { tpn::run_eval(config->value, checkpoint, out_dir); });
}

tpn_status tpn_reference(const tpn_config* config, const char* out_dir) {
  if (!config) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] { tpn::run_reference(config->value, out_dir); });
}

tpn_status tpn_compare(const tpn_config* config, const char* dnn_dir, const char* ref_dir, const char* out_dir) {
  if (!dnn_dir) return null_argument("dnn_dir");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] {
    std::optional<std::filesystem::path> ref;
    if (ref_dir) ref = ref_dir;
    tpn::run_compare(dnn_dir, ref, config ? &config->value : nullptr, out_dir);
  });
}

tpn_status tpn_network_init(const int* layer_sizes, size_t count, uint64_t seed, tpn_network** out) {
  if (!layer_sizes) return null_argument("layer_sizes");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tpn_network{tpn::init_params({layer_sizes, count}, seed)}; });
}

tpn_status tpn_network_load(const char* path, tpn_network** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new tpn_network{tpn::load_params(path)}; });
}

tpn_status tpn_network_save(const tpn_network* network, const char* path) {
  if (!network) return null_argument("network");
  if (!path) return null_argument("path");
  return guarded([&] { tpn::save_params(network->value, path); });
}

size_t tpn_network_num_parameters(const tpn_network* network) {
  return network ? network->value.num_parameters() : 0;
}

tpn_status tpn_network_forward(const tpn_network* network, double t, double x, double mu, double* value) {
  if (!network) return null_argument("network");
  if (!value) return null_argument("value");
  return guarded([&] { *value = tpn::forward(network->value, t, x, mu); });
}

tpn_status tpn_network_forward_jet(const tpn_network* network, double t, double x, double mu, double jet[4]) {
  if (!network) return null_argument("network");
  if (!jet) return null_argument("jet");
  return guarded([&] {
    const tpn::Jet3 j = tpn::forward_jet(network->value, t, x, mu);
    jet[0] = j.value;
    jet[1] = j.d_t;
    jet[2] = j.d_x;
    jet[3] = j.d_mu;
  });
}

void tpn_network_free(tpn_network* network) { delete network; }

tpn_status tpn_gauss_legendre(int n, double* nodes, double* weights) {
  if (!nodes || !weights) return null_argument("nodes/weights");
  return guarded([&] {
    const tpn::AngularGrid grid = tpn::gauss_legendre(n);
    std::copy(grid.nodes.begin(), grid.nodes.end(), nodes);
    std::copy(grid.weights.begin(), grid.weights.end(), weights);
  });
}

}  // extern "C"
