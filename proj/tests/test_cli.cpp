#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(TPN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tpn_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* tiny =
    "schema_version = 1\nproblem = manufactured\nn_t = 3\nn_x = 5\nn_mu = 4\nn_ic = 8\nn_bc = 8\n"
    "layers = 3, 6, 1\nmax_steps = 4\nlog_every = 2\ngrid_n_x = 10\ngrid_n_mu = 4\n";

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run("--help") == 0);
  CHECK(run("") != 0);
  CHECK(run("train --out x") == 2);
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("missing config exits 2 and writes nothing") {
  const fs::path dir = scratch("missing");
  CHECK(run("train --config " + (dir / "nope.cfg").string() + " --out " + (dir / "out").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("invalid config exits 2") {
  const fs::path dir = scratch("invalid");
  write(dir / "bad.cfg", "schema_version = 1\nproblem = manufactured\nsigma_a = -3\n");
  CHECK(run("train --config " + (dir / "bad.cfg").string() + " --out " + (dir / "out").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "out" / "history.csv"));
}

TEST_CASE("zero steps gives a one-row history") {
  const fs::path dir = scratch("zero");
  write(dir / "run.cfg", std::string(tiny) + "max_steps = 0\n");
  REQUIRE(run("train --config " + (dir / "run.cfg").string() + " --out " + (dir / "out").string()) == 0);
  const std::string history = slurp(dir / "out" / "history.csv");
  CHECK(std::count(history.begin(), history.end(), '\n') == 2);
  CHECK(history.rfind("step,loss_total,loss_ge,loss_ic,loss_bc,wall_time_s\n0,", 0) == 0);
}

TEST_CASE("train, eval, reference and compare") {
  const fs::path dir = scratch("pipeline");
  write(dir / "run.cfg", tiny);
  const std::string cfg = " --config " + (dir / "run.cfg").string();
  REQUIRE(run("train" + cfg + " --out " + (dir / "a").string() + " --seed 3 --subsample 0.5") == 0);
  REQUIRE(run("train" + cfg + " --out " + (dir / "b").string() + " --seed 3 --subsample 0.5") == 0);
  CHECK(slurp(dir / "a" / "history.csv") == slurp(dir / "b" / "history.csv"));
  CHECK(fs::exists(dir / "a" / "timing.csv"));

  REQUIRE(run("eval" + cfg + " --out " + (dir / "a").string() + " --times 0.5,1") == 0);
  CHECK(fs::exists(dir / "a" / "psi_0.5.csv"));
  CHECK(fs::exists(dir / "a" / "rho_1.csv"));
  REQUIRE(run("compare --dnn " + (dir / "a").string() + cfg + " --out " + (dir / "a").string()) == 0);
  CHECK(slurp(dir / "a" / "errors.csv").rfind("time,rel_l2_psi,rel_l2_rho\n", 0) == 0);

  REQUIRE(run("reference" + cfg + " --out " + (dir / "ref").string() + " --times 1") == 0);
  CHECK(run("compare --dnn " + (dir / "a").string() + " --ref " + (dir / "ref").string() + " --out " +
            (dir / "c").string()) == 0);

  std::string other = tiny;
  other.replace(other.find("grid_n_x = 10"), 13, "grid_n_x = 12");
  write(dir / "grid.cfg", other);
  REQUIRE(run("reference --config " + (dir / "grid.cfg").string() + " --out " + (dir / "ref2").string() + " --times 1") == 0);
  CHECK(run("compare --dnn " + (dir / "a").string() + " --ref " + (dir / "ref2").string() + " --out " +
            (dir / "d").string()) == 5);
  CHECK(run("eval" + cfg + " --out " + (dir / "a").string() + " --checkpoint " + (dir / "none.ckpt").string()) == 2);
}
