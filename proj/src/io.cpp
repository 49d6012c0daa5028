#include "ctinv/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "ctinv/errors.hpp"

namespace ctinv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line << ": " << msg;
  throw Error(ErrorKind::Parse, os.str());
}

std::optional<double> to_double(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, path + ": cannot open file");
  return in;
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::optional<std::string> CsvTable::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::nullopt;
}

void write_csv(std::ostream& os, const CsvTable& table) {
  for (const auto& [k, v] : table.meta) os << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
}

CsvTable read_csv(std::istream& is, const std::string& source) {
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      const std::string body = trim(s.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string::npos) t.meta.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split(s, ',');
      continue;
    }
    const auto cells = split(s, ',');
    if (cells.size() != t.columns.size())
      parse_fail(source, lineno, "expected " + std::to_string(t.columns.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      const auto v = to_double(c);
      if (!v) parse_fail(source, lineno, "not a number: '" + c + "'");
      row.push_back(*v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) parse_fail(source, lineno, "missing header line");
  return t;
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Config::get_double(const std::string& key) const {
  const auto s = get(key);
  if (!s) return std::nullopt;
  const auto v = to_double(*s);
  if (!v) throw Error(ErrorKind::Parse, "config key '" + key + "': not a number: '" + *s + "'");
  return v;
}

std::optional<int> Config::get_int(const std::string& key) const {
  const auto v = get_double(key);
  if (!v) return std::nullopt;
  if (*v != std::floor(*v)) throw Error(ErrorKind::Parse, "config key '" + key + "': not an integer");
  return static_cast<int>(*v);
}

Config parse_config(std::istream& is, const std::string& source) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string s = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) parse_fail(source, lineno, "expected key=value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) parse_fail(source, lineno, "empty key");
    cfg.set(key, trim(s.substr(eq + 1)));
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return parse_config(in, path);
}

InputSet parse_phases(std::istream& is, const std::string& source) {
  std::vector<int> ells;
  std::vector<double> deltas;
  std::set<int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::istringstream ss(hash == std::string::npos ? line : line.substr(0, hash));
    std::string a, b, extra;
    if (!(ss >> a)) continue;
    if (!(ss >> b) || (ss >> extra)) parse_fail(source, lineno, "expected two fields 'l delta'");
    const auto l = to_double(a);
    const auto d = to_double(b);
    if (!l || *l != std::floor(*l) || *l < 0) parse_fail(source, lineno, "l must be an integer >= 0: '" + a + "'");
    if (!d) parse_fail(source, lineno, "delta is not a number: '" + b + "'");
    if (!(*d > -std::numbers::pi / 2 && *d <= std::numbers::pi / 2))
      parse_fail(source, lineno, "delta outside (-pi/2, pi/2]: " + b);
    const int ell = static_cast<int>(*l);
    if (!seen.insert(ell).second) parse_fail(source, lineno, "repeated l = " + a);
    ells.push_back(ell);
    deltas.push_back(*d);
  }
  if (ells.empty()) throw Error(ErrorKind::Usage, source + ": no phase shifts given");
  return InputSet(std::move(ells), std::move(deltas));
}

InputSet load_phases(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return parse_phases(in, path);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::string t = text;
  for (char& c : t)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream ss(t);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    const auto v = to_double(tok);
    if (!v) throw Error(ErrorKind::Usage, what + ": not a number: '" + tok + "'");
    out.push_back(*v);
  }
  return out;
}

std::string join_numbers(const Eigen::VectorXd& v, const char* sep) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_number(v[i]);
  }
  return out;
}

CsvTable profile_table(const PotentialProfile& profile) {
  CsvTable t;
  t.meta = {{"tool", std::string("ctinv ") + kVersion},
            {"S", join_numbers(profile.ells)},
            {"T", join_numbers(profile.Ls)},
            {"lambda", format_number(profile.grid.r_max())},
            {"h", format_number(profile.grid.h())},
            {"q0", format_number(profile.q0)}};
  if (profile.tail) {
    const TailParams& tp = *profile.tail;
    t.meta.emplace_back("tail_alpha", format_number(tp.alpha));
    t.meta.emplace_back("tail_beta", format_number(tp.beta));
    t.meta.emplace_back("tail_gamma", format_number(tp.gamma));
  }
  t.columns = {"r", "q"};
  t.rows.reserve(static_cast<std::size_t>(profile.r.size()));
  for (Eigen::Index i = 0; i < profile.r.size(); ++i) t.rows.push_back({profile.r[i], profile.q[i]});
  return t;
}

SampledPotential read_potential(std::istream& is, const std::string& source) {
  const CsvTable t = read_csv(is, source);
  if (t.columns.size() != 2 || t.columns[0] != "r" || t.columns[1] != "q")
    throw Error(ErrorKind::Parse, source + ": expected columns r,q");
  Eigen::VectorXd r(static_cast<Eigen::Index>(t.rows.size())), q(r.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    r[static_cast<Eigen::Index>(i)] = t.rows[i][0];
    q[static_cast<Eigen::Index>(i)] = t.rows[i][1];
  }
  auto meta_num = [&](const char* key) -> std::optional<double> {
    const auto v = t.meta_value(key);
    if (!v) return std::nullopt;
    const auto d = to_double(*v);
    if (!d) throw Error(ErrorKind::Parse, source + ": metadata '" + key + "' is not a number");
    return d;
  };
  std::optional<TailParams> tail;
  const auto a = meta_num("tail_alpha"), b = meta_num("tail_beta");
  if (a && b) {
    tail = TailParams{};
    tail->alpha = *a;
    tail->beta = *b;
    tail->gamma = meta_num("tail_gamma").value_or(0.0);
    tail->r_to = r.size() ? r[r.size() - 1] : 0.0;
  }
  return SampledPotential::from_samples(std::move(r), std::move(q), tail, meta_num("q0"));
}

SampledPotential load_potential(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return read_potential(in, path);
}

CsvTable phase_table_csv(const PhaseShiftTable& table, const std::string& potential_name) {
  CsvTable t;
  t.meta = {{"tool", std::string("ctinv ") + kVersion}, {"potential", potential_name}};
  for (const PhaseEntry& e : table.entries)
    if (e.error) t.meta.emplace_back("error_l" + std::to_string(e.ell), *e.error);
  t.columns = {"l", "delta", "B", "residual"};
  for (const PhaseEntry& e : table.entries) {
    if (e.error) continue;
    t.rows.push_back({static_cast<double>(e.ell), e.delta, e.B, e.residual});
  }
  return t;
}

CsvTable map_table(const AdmissibilityMap& map) {
  CsvTable t;
  t.meta = {{"tool", std::string("ctinv ") + kVersion},
            {"S", join_numbers(map.ells)},
            {"lambda", format_number(map.lambda)},
            {"unsettled", std::to_string(map.unsettled)},
            {"errors", std::to_string(map.errors)}};
  t.columns = {"L1", "L2", "admissible"};
  for (Eigen::Index i = 0; i < map.axis1.size(); ++i)
    for (Eigen::Index j = 0; j < map.axis2.size(); ++j)
      t.rows.push_back({map.axis1[i], map.axis2[j], static_cast<double>(map.cells(i, j))});
  return t;
}

}  // namespace ctinv
