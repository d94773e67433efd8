#include "config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "network.hpp"

namespace tpn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  fail(ErrorCode::invalid_config, "config key '" + key + "': " + what);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) bad(key, "expected a number, got '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) bad(key, "expected an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long l = to_long(key, v);
  if (l < INT32_MIN || l > INT32_MAX) bad(key, "integer out of range");
  return static_cast<int>(l);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(ErrorCode::invalid_config, "empty entry in list '" + text + "'");
    out.push_back(to_double("list", item));
  }
  return out;
}

std::vector<double> default_output_times(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::manufactured:
      return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    case ProblemKind::plane_source:
      return {0.0, 0.1, 0.3, 1.0};
    case ProblemKind::two_beam:
      return {0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
  }
  return {};
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "schema_version") {
    c.schema_version = to_int(key, v);
  } else if (key == "problem") {
    if (v == "manufactured") c.problem = ProblemKind::manufactured;
    else if (v == "plane_source") c.problem = ProblemKind::plane_source;
    else if (v == "two_beam") c.problem = ProblemKind::two_beam;
    else bad(key, "unknown problem '" + v + "'");
  } else if (key == "sigma_s") {
    c.sigma_s = to_double(key, v);
  } else if (key == "sigma_a") {
    c.sigma_a = to_double(key, v);
  } else if (key == "k") {
    c.k = to_double(key, v);
  } else if (key == "r") {
    c.r = to_double(key, v);
  } else if (key == "boundary") {
    if (v == "inflow") c.specular = false;
    else if (v == "specular") c.specular = true;
    else bad(key, "expected inflow or specular");
  } else if (key == "n_t") {
    c.n_t = to_int(key, v);
  } else if (key == "n_x") {
    c.n_x = to_int(key, v);
  } else if (key == "n_mu") {
    c.n_mu = to_int(key, v);
  } else if (key == "n_ic") {
    c.n_ic = to_int(key, v);
  } else if (key == "n_bc") {
    c.n_bc = to_int(key, v);
  } else if (key == "subsample") {
    c.subsample = to_double(key, v);
  } else if (key == "layers") {
    c.layers.clear();
    for (double d : parse_number_list(v)) {
      if (d != static_cast<int>(d)) bad(key, "layer sizes must be integers");
      c.layers.push_back(static_cast<int>(d));
    }
  } else if (key == "max_steps") {
    c.train.max_steps = to_long(key, v);
  } else if (key == "learning_rate") {
    c.train.learning_rate = to_double(key, v);
  } else if (key == "lr_decay_factor") {
    c.train.lr_decay_factor = to_double(key, v);
  } else if (key == "lr_decay_every") {
    c.train.lr_decay_every = to_long(key, v);
  } else if (key == "adam_beta1") {
    c.train.adam_beta1 = to_double(key, v);
  } else if (key == "adam_beta2") {
    c.train.adam_beta2 = to_double(key, v);
  } else if (key == "adam_eps") {
    c.train.adam_eps = to_double(key, v);
  } else if (key == "seed") {
    const long s = to_long(key, v);
    if (s < 0) bad(key, "seed must be >= 0");
    c.train.seed = static_cast<std::uint64_t>(s);
  } else if (key == "log_every") {
    c.train.log_every = to_long(key, v);
  } else if (key == "checkpoint_every") {
    c.train.checkpoint_every = to_long(key, v);
  } else if (key == "target_loss") {
    if (v == "none") c.train.target_loss.reset();
    else c.train.target_loss = to_double(key, v);
  } else if (key == "wall_time_in_history") {
    c.wall_time_in_history = to_bool(key, v);
  } else if (key == "output_times") {
    c.output_times = parse_number_list(v);
  } else if (key == "grid_n_x") {
    c.grid_n_x = to_int(key, v);
  } else if (key == "grid_n_mu") {
    c.grid_n_mu = to_int(key, v);
  } else if (key == "ref_dt") {
    c.ref_dt = to_double(key, v);
  } else {
    fail(ErrorCode::invalid_config, "unknown config key '" + key + "'");
  }
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_version = false;
  bool saw_problem = false;
  bool saw_times = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::invalid_config, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    set_config_value(c, key, line.substr(eq + 1));
    saw_version |= key == "schema_version";
    saw_problem |= key == "problem";
    saw_times |= key == "output_times";
  }
  if (!saw_version) fail(ErrorCode::invalid_config, "missing schema_version");
  if (!saw_problem) fail(ErrorCode::invalid_config, "missing problem");
  if (c.layers.empty()) c.layers = default_layer_sizes();
  if (!saw_times) c.output_times = default_output_times(c.problem);
  validate_run_config(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::invalid_config, "cannot read config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

void validate_run_config(const RunConfig& c) {
  try {
    if (c.schema_version != 1) fail(ErrorCode::invalid_config, "unsupported schema_version " + std::to_string(c.schema_version));
    const TransportProblem problem = make_problem(c);
    validate_problem(problem);
    require(c.n_t >= 1 && c.n_x >= 1 && c.n_mu >= 1 && c.n_ic >= 1 && c.n_bc >= 1, "collocation counts must be >= 1");
    require(c.subsample > 0.0 && c.subsample <= 1.0, "subsample must lie in (0, 1]");
    validate_layer_sizes(c.layers);
    validate_train_config(c.train);
    require(!c.output_times.empty(), "output_times must not be empty");
    for (std::size_t i = 0; i < c.output_times.size(); ++i) {
      const double t = c.output_times[i];
      require(t >= 0.0 && t <= problem.t_end, "output time " + std::to_string(t) + " outside [0, t_end]");
      require(i == 0 || t > c.output_times[i - 1], "output_times must be strictly increasing");
    }
    require(c.grid_n_x >= 1 && c.grid_n_mu >= 1, "grid_n_x and grid_n_mu must be >= 1");
    require(c.ref_dt > 0.0, "ref_dt must be positive");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_config) throw;
    fail(ErrorCode::invalid_config, e.what());
  }
}

TransportProblem make_problem(const RunConfig& c) {
  TransportProblem p;
  switch (c.problem) {
    case ProblemKind::manufactured:
      p = manufactured_problem(c.sigma_s, c.sigma_a);
      break;
    case ProblemKind::plane_source:
      p = plane_source_problem(c.sigma_s, c.sigma_a, c.k);
      break;
    case ProblemKind::two_beam:
      p = two_beam_problem(c.r);
      break;
  }
  if (c.specular) p.boundary = SpecularBoundary{};
  return p;
}

}  // namespace tpn
