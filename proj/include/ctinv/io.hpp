#pragma once

// Plain-text formats: CSV with a "#" metadata header, flat key=value
// configuration files and phase-shift input files.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctinv/consistency.hpp"
#include "ctinv/ctcore.hpp"
#include "ctinv/forward.hpp"
#include "ctinv/glm.hpp"

namespace ctinv {

inline constexpr const char* kVersion = "0.1.0";

/// 12 significant digits; parse(format(x)) formats back to the same text.
std::string format_number(double x);

struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;  // "# key: value" lines
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::optional<std::string> meta_value(const std::string& key) const;
};

void write_csv(std::ostream& os, const CsvTable& table);
/// Throws ErrorKind::Parse naming source and line.
CsvTable read_csv(std::istream& is, const std::string& source);

/// Flat key=value configuration; '#' starts a comment.
class Config {
public:
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<int> get_int(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
  std::map<std::string, std::string> values_;
};

Config parse_config(std::istream& is, const std::string& source);
Config load_config(const std::string& path);

/// Lines "l delta" with distinct integers l >= 0 and delta in (-pi/2, pi/2].
InputSet parse_phases(std::istream& is, const std::string& source);
InputSet load_phases(const std::string& path);

/// Comma- or whitespace-separated list of reals.
std::vector<double> parse_list(const std::string& text, const std::string& what);

std::string join_numbers(const Eigen::VectorXd& v, const char* sep = " ");

CsvTable profile_table(const PotentialProfile& profile);
/// Reads "r,q" with the optional tail metadata written by profile_table.
SampledPotential read_potential(std::istream& is, const std::string& source);
SampledPotential load_potential(const std::string& path);

CsvTable phase_table_csv(const PhaseShiftTable& table, const std::string& potential_name);
CsvTable map_table(const AdmissibilityMap& map);

}  // namespace ctinv
