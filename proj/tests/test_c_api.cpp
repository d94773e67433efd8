#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "transport_pinn/transport_pinn.h"

namespace fs = std::filesystem;

TEST_CASE("version and defaults") {
  CHECK(std::string(tpn_version()) == "1.0.0");
  CHECK(tpn_default_threads() >= 1);
}

TEST_CASE("gauss-legendre through the C interface") {
  std::vector<double> nodes(3), weights(3);
  REQUIRE(tpn_gauss_legendre(3, nodes.data(), weights.data()) == TPN_OK);
  CHECK(nodes[1] == doctest::Approx(0.0));
  CHECK(weights[0] + weights[1] + weights[2] == doctest::Approx(2.0));
  CHECK(tpn_gauss_legendre(0, nodes.data(), weights.data()) == TPN_ERR_INVALID_ARGUMENT);
  CHECK(std::string(tpn_last_error()).size() > 0);
  CHECK(tpn_gauss_legendre(3, nullptr, weights.data()) == TPN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("network lifecycle") {
  const int sizes[] = {3, 4, 1};
  tpn_network* net = nullptr;
  REQUIRE(tpn_network_init(sizes, 3, 5, &net) == TPN_OK);
  CHECK(tpn_network_num_parameters(net) == 3 * 4 + 4 + 4 + 1);
  double value = 0.0, jet[4] = {};
  REQUIRE(tpn_network_forward(net, 0.1, 0.2, 0.3, &value) == TPN_OK);
  REQUIRE(tpn_network_forward_jet(net, 0.1, 0.2, 0.3, jet) == TPN_OK);
  CHECK(jet[0] == value);

  const fs::path path = fs::temp_directory_path() / "tpn_c_api.ckpt";
  REQUIRE(tpn_network_save(net, path.string().c_str()) == TPN_OK);
  tpn_network* loaded = nullptr;
  REQUIRE(tpn_network_load(path.string().c_str(), &loaded) == TPN_OK);
  double again = 0.0;
  tpn_network_forward(loaded, 0.1, 0.2, 0.3, &again);
  CHECK(again == value);
  tpn_network_free(loaded);
  tpn_network_free(net);

  CHECK(tpn_network_load("/nonexistent.ckpt", &loaded) == TPN_ERR_IO);
  const int bad[] = {2, 4, 1};
  CHECK(tpn_network_init(bad, 3, 5, &net) == TPN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config handles") {
  tpn_config* cfg = nullptr;
  CHECK(tpn_config_parse("schema_version = 1\n", &cfg) == TPN_ERR_INVALID_CONFIG);
  CHECK(cfg == nullptr);
  REQUIRE(tpn_config_parse("schema_version = 1\nproblem = manufactured\n", &cfg) == TPN_OK);
  CHECK(tpn_config_set(cfg, "subsample", "0.5") == TPN_OK);
  CHECK(tpn_config_set(cfg, "subsample", "7") == TPN_ERR_INVALID_CONFIG);
  CHECK(tpn_config_set(cfg, "nonsense", "1") == TPN_ERR_INVALID_CONFIG);
  tpn_config_free(cfg);
  CHECK(tpn_config_load("/nonexistent.cfg", &cfg) == TPN_ERR_INVALID_CONFIG);
}

TEST_CASE("train, eval and compare end to end") {
  const fs::path out = fs::temp_directory_path() / "tpn_c_api_run";
  fs::remove_all(out);
  tpn_config* cfg = nullptr;
  REQUIRE(tpn_config_parse("schema_version = 1\nproblem = manufactured\nn_t = 3\nn_x = 5\nn_mu = 4\n"
                           "n_ic = 8\nn_bc = 8\nlayers = 3, 6, 1\nmax_steps = 3\nlog_every = 1\n"
                           "grid_n_x = 10\ngrid_n_mu = 4\noutput_times = 0, 1\n",
                           &cfg) == TPN_OK);
  REQUIRE(tpn_train(cfg, out.string().c_str(), 0) == TPN_OK);
  CHECK(fs::exists(out / "history.csv"));
  CHECK(fs::exists(out / "final.ckpt"));
  REQUIRE(tpn_eval(cfg, (out / "final.ckpt").string().c_str(), out.string().c_str()) == TPN_OK);
  CHECK(fs::exists(out / "psi_1.csv"));
  CHECK(fs::exists(out / "rho_0.csv"));
  REQUIRE(tpn_compare(cfg, out.string().c_str(), nullptr, out.string().c_str()) == TPN_OK);
  CHECK(fs::exists(out / "errors.csv"));
  CHECK(tpn_eval(cfg, "/nonexistent.ckpt", out.string().c_str()) == TPN_ERR_IO);
  tpn_config_free(cfg);
}
