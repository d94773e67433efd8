#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "reference.hpp"
#include "trainer.hpp"

namespace tpn {

/// Short decimal form of a snapshot time used in file names ("0.2", "10").
std::string time_label(double t);

/// fp64 with 17 significant digits.
std::string format_double(double v);

/// Writes psi_<t>.csv (header t,x,mu,psi; long form, x outer, mu inner) and
/// rho_<t>.csv (header x,rho_h) for every output time of `field`.
void write_field_files(const std::filesystem::path& dir, const SolutionField& field);

/// One psi_<t>.csv file.
struct FieldSnapshot {
  double t = 0.0;
  std::vector<double> xs;
  std::vector<double> mus;
  std::vector<double> psi;  // [cell][mu]
};

struct Profile {
  std::vector<double> xs;
  std::vector<double> rho;
};

FieldSnapshot read_psi_file(const std::filesystem::path& path);
Profile read_rho_file(const std::filesystem::path& path);

/// time label -> psi file for every psi_*.csv in `dir`.
std::map<std::string, std::filesystem::path> list_psi_files(const std::filesystem::path& dir);

void write_history_header(std::ostream& out);
void write_history_row(std::ostream& out, const TrainRecord& record);
std::vector<TrainRecord> read_history(const std::filesystem::path& path);

}  // namespace tpn
