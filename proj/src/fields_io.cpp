#include "fields_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace tpn {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_cell(const std::string& s, const fs::path& path) {
  // strtod keeps subnormals and reads inf/nan, which stod would reject.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) fail(ErrorCode::io, "malformed number '" + s + "' in " + path.string());
  return v;
}

std::ifstream open_with_header(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) fail(ErrorCode::io, path.string() + ": expected header '" + header + "'");
  return in;
}

}  // namespace

std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", t);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_field_files(const fs::path& dir, const SolutionField& field) {
  fs::create_directories(dir);
  const std::size_t n = field.xs.size();
  const std::size_t m = field.grid.size();
  const auto rho = angular_average_field(field);
  for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
    const std::string label = time_label(field.times[ti]);
    const std::string t = format_double(field.times[ti]);
    {
      std::ofstream out(dir / ("psi_" + label + ".csv"), std::ios::trunc);
      if (!out) fail(ErrorCode::io, "cannot write field file in " + dir.string());
      out << "t,x,mu,psi\n";
      for (std::size_t i = 0; i < n; ++i) {
        const std::string x = format_double(field.xs[i]);
        for (std::size_t k = 0; k < m; ++k) {
          out << t << ',' << x << ',' << format_double(field.grid.nodes[k]) << ','
              << format_double(field.at(ti, i, k)) << '\n';
        }
      }
      if (!out) fail(ErrorCode::io, "failed writing field file in " + dir.string());
    }
    std::ofstream out(dir / ("rho_" + label + ".csv"), std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write profile file in " + dir.string());
    out << "x,rho_h\n";
    for (std::size_t i = 0; i < n; ++i) out << format_double(field.xs[i]) << ',' << format_double(rho[ti][i]) << '\n';
    if (!out) fail(ErrorCode::io, "failed writing profile file in " + dir.string());
  }
}

FieldSnapshot read_psi_file(const fs::path& path) {
  std::ifstream in = open_with_header(path, "t,x,mu,psi");
  FieldSnapshot snap;
  std::string line;
  bool first = true;
  double current_x = NAN;
  std::size_t row_in_cell = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) fail(ErrorCode::io, path.string() + ": expected 4 columns");
    const double t = parse_cell(cells[0], path);
    const double x = parse_cell(cells[1], path);
    const double mu = parse_cell(cells[2], path);
    const double v = parse_cell(cells[3], path);
    if (first) {
      snap.t = t;
      first = false;
    } else if (t != snap.t) {
      fail(ErrorCode::io, path.string() + ": mixed times in one field file");
    }
    if (snap.xs.empty() || x != current_x) {
      if (!snap.xs.empty() && row_in_cell != snap.mus.size()) fail(ErrorCode::io, path.string() + ": ragged mu grid");
      snap.xs.push_back(x);
      current_x = x;
      row_in_cell = 0;
    }
    if (snap.xs.size() == 1) {
      snap.mus.push_back(mu);
    } else if (row_in_cell >= snap.mus.size() || snap.mus[row_in_cell] != mu) {
      fail(ErrorCode::io, path.string() + ": mu grid differs between cells");
    }
    ++row_in_cell;
    snap.psi.push_back(v);
  }
  if (snap.xs.empty() || row_in_cell != snap.mus.size()) fail(ErrorCode::io, path.string() + ": empty or ragged field");
  return snap;
}

Profile read_rho_file(const fs::path& path) {
  std::ifstream in = open_with_header(path, "x,rho_h");
  Profile p;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) fail(ErrorCode::io, path.string() + ": expected 2 columns");
    p.xs.push_back(parse_cell(cells[0], path));
    p.rho.push_back(parse_cell(cells[1], path));
  }
  return p;
}

std::map<std::string, fs::path> list_psi_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::io, "not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("psi_", 0) == 0 && name.size() > 8 && name.substr(name.size() - 4) == ".csv") {
      out[name.substr(4, name.size() - 8)] = entry.path();
    }
  }
  return out;
}

void write_history_header(std::ostream& out) { out << "step,loss_total,loss_ge,loss_ic,loss_bc,wall_time_s\n"; }

void write_history_row(std::ostream& out, const TrainRecord& r) {
  out << r.step << ',' << format_double(r.loss.total) << ',' << format_double(r.loss.ge) << ','
      << format_double(r.loss.ic) << ',' << format_double(r.loss.bc) << ',' << format_double(r.wall_time) << '\n';
}

std::vector<TrainRecord> read_history(const fs::path& path) {
  std::ifstream in = open_with_header(path, "step,loss_total,loss_ge,loss_ic,loss_bc,wall_time_s");
  std::vector<TrainRecord> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) fail(ErrorCode::io, path.string() + ": expected 6 columns");
    TrainRecord r;
    r.step = static_cast<long>(parse_cell(cells[0], path));
    r.loss.total = parse_cell(cells[1], path);
    r.loss.ge = parse_cell(cells[2], path);
    r.loss.ic = parse_cell(cells[3], path);
    r.loss.bc = parse_cell(cells[4], path);
    r.wall_time = parse_cell(cells[5], path);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace tpn
