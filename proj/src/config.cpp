#include "odmdi/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "odmdi/errors.hpp"

namespace odmdi::config {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError(std::string(key) + ": " + std::string(why) + " (got '" + std::string(value) + "')");
}

double to_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) bad(key, text, "expected a number");
  return v;
}

template <class Int>
Int to_int(std::string_view key, std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) bad(key, text, "expected an integer");
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  bad(key, text, "expected true or false");
}

std::vector<double> to_doubles(std::string_view key, std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (auto part : split(text, ',')) out.push_back(to_double(key, part));
  return out;
}

std::vector<double> to_grid(std::string_view key, std::string_view text) {
  if (text.find(':') == std::string_view::npos) return to_doubles(key, text);
  const auto parts = split(text, ':');
  if (parts.size() != 3) bad(key, text, "range must be start:stop:step");
  const double start = to_double(key, parts[0]);
  const double stop = to_double(key, parts[1]);
  const double step = to_double(key, parts[2]);
  if (!(step > 0.0) || stop < start) bad(key, text, "range needs step > 0 and stop >= start");
  std::vector<double> out;
  for (long i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest spelling that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += f(values[i]);
  }
  return s;
}

}  // namespace

Config::Config() {
  for (int d = 0; d <= 700; d += 10) distances_km.push_back(d);
}

netsim::Topology Config::topology() const {
  netsim::Topology t = netsim::Topology::star(num_users, comm_users, mc_distance_km, aux_arm_km, detector, source_p,
                                              relay_at_midpoint);
  t.aux_uniform_bases = aux_uniform_bases;
  return t;
}

void Config::validate() const {
  try {
    detector.validate();
    session.validate();
    topology().validate();
  } catch (const CapacityError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (p_values.empty() || distances_km.empty()) throw ConfigError("sweep grids must be nonempty");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p_values entries must lie in [0, 1]");
  }
  for (double d : distances_km) {
    if (!(d >= 0.0)) throw ConfigError("distances_km entries must be >= 0");
  }
  if (!(mc_distance_km >= 0.0) || !(aux_arm_km >= 0.0)) throw ConfigError("link lengths must be >= 0");
}

bool Config::operator==(const Config& o) const {
  return detector == o.detector && p_values == o.p_values && distances_km == o.distances_km &&
         relay_at_midpoint == o.relay_at_midpoint && num_users == o.num_users && comm_users == o.comm_users &&
         source_p == o.source_p && mc_distance_km == o.mc_distance_km && aux_arm_km == o.aux_arm_km &&
         aux_uniform_bases == o.aux_uniform_bases && session.rounds == o.session.rounds &&
         session.seed == o.session.seed && session.basis_bias == o.session.basis_bias &&
         session.workers == o.session.workers && output == o.output && format == o.format;
}

void set_value(Config& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "eta_d") c.detector.eta_d = to_double(key, value);
  else if (key == "p_d") c.detector.p_d = to_double(key, value);
  else if (key == "e_d") c.detector.e_d = to_double(key, value);
  else if (key == "f") c.detector.f = to_double(key, value);
  else if (key == "alpha") c.detector.alpha = to_double(key, value);
  else if (key == "p_values") c.p_values = to_doubles(key, value);
  else if (key == "distances_km") c.distances_km = to_grid(key, value);
  else if (key == "relay_at_midpoint") c.relay_at_midpoint = to_bool(key, value);
  else if (key == "num_users") c.num_users = to_int<int>(key, value);
  else if (key == "comm_users") {
    c.comm_users.clear();
    for (auto part : split(value, ',')) c.comm_users.push_back(to_int<int>(key, part));
  }
  else if (key == "source_p") c.source_p = to_double(key, value);
  else if (key == "mc_distance_km") c.mc_distance_km = to_double(key, value);
  else if (key == "aux_arm_km") c.aux_arm_km = to_double(key, value);
  else if (key == "aux_uniform_bases") c.aux_uniform_bases = to_bool(key, value);
  else if (key == "rounds") c.session.rounds = to_int<std::uint64_t>(key, value);
  else if (key == "seed") c.session.seed = to_int<std::uint64_t>(key, value);
  else if (key == "basis_bias") c.session.basis_bias = to_double(key, value);
  else if (key == "workers") c.session.workers = to_int<unsigned>(key, value);
  else if (key == "output") c.output = std::string(value);
  else if (key == "format") {
    if (value == "csv") c.format = OutputFormat::Csv;
    else if (value == "json") c.format = OutputFormat::Json;
    else bad(key, value, "expected csv or json");
  }
  else throw ConfigError("unknown key '" + std::string(key) + "'");
}

Config parse(std::string_view text) {
  Config c;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

Config load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string serialize(const Config& c) {
  std::ostringstream out;
  out << "eta_d = " << fmt(c.detector.eta_d) << '\n'
      << "p_d = " << fmt(c.detector.p_d) << '\n'
      << "e_d = " << fmt(c.detector.e_d) << '\n'
      << "f = " << fmt(c.detector.f) << '\n'
      << "alpha = " << fmt(c.detector.alpha) << '\n'
      << "p_values = " << join(c.p_values, fmt) << '\n'
      << "distances_km = " << join(c.distances_km, fmt) << '\n'
      << "relay_at_midpoint = " << (c.relay_at_midpoint ? "true" : "false") << '\n'
      << "num_users = " << c.num_users << '\n'
      << "comm_users = " << join(c.comm_users, [](int u) { return std::to_string(u); }) << '\n'
      << "source_p = " << fmt(c.source_p) << '\n'
      << "mc_distance_km = " << fmt(c.mc_distance_km) << '\n'
      << "aux_arm_km = " << fmt(c.aux_arm_km) << '\n'
      << "aux_uniform_bases = " << (c.aux_uniform_bases ? "true" : "false") << '\n'
      << "rounds = " << c.session.rounds << '\n'
      << "seed = " << c.session.seed << '\n'
      << "basis_bias = " << fmt(c.session.basis_bias) << '\n'
      << "workers = " << c.session.workers << '\n'
      << "output = " << c.output << '\n'
      << "format = " << (c.format == OutputFormat::Csv ? "csv" : "json") << '\n';
  return out.str();
}

}  // namespace odmdi::config
