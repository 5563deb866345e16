#pragma once

// Key-value experiment configuration.
//
// One `key = value` per line; `#` starts a comment. Lists are comma
// separated; `distances_km` also accepts `start:stop:step`. Every key is
// optional and falls back to the defaults below. Unknown keys are errors.
//
//   eta_d, p_d, e_d, f, alpha       detector and fiber parameters
//   p_values, distances_km          sweep grid
//   relay_at_midpoint               true|false
//   num_users, comm_users           network shape (comm_users: list of 2 or 3)
//   source_p                        Werner weight of the Monte Carlo source
//   mc_distance_km, aux_arm_km      Monte Carlo link lengths
//   aux_uniform_bases               true|false
//   rounds, seed, basis_bias, workers
//   output                          path; empty means stdout
//   format                          csv|json

#include <string>
#include <string_view>
#include <vector>

#include "odmdi/detector.hpp"
#include "odmdi/netsim.hpp"

namespace odmdi::config {

enum class OutputFormat { Csv, Json };

struct Config {
  detector::DetectorParams detector;
  std::vector<double> p_values{1.0, 0.98, 0.96};
  std::vector<double> distances_km;  // 0, 10, ..., 700 by default
  bool relay_at_midpoint = false;

  int num_users = 4;
  std::vector<int> comm_users{0, 1};
  double source_p = 1.0;
  double mc_distance_km = 50.0;
  double aux_arm_km = 0.0;
  bool aux_uniform_bases = false;
  netsim::SessionConfig session;

  std::string output;
  OutputFormat format = OutputFormat::Csv;

  Config();

  netsim::Topology topology() const;
  // Throws ConfigError (CapacityError for more than 8 users).
  void validate() const;
  bool operator==(const Config&) const;
};

// Sets one key from its text value. Throws ConfigError.
void set_value(Config& config, std::string_view key, std::string_view value);

// Throws ConfigError naming the offending line.
Config parse(std::string_view text);

// Throws ConfigError when the file cannot be read.
Config load(const std::string& path);

// Emits every key; parse(serialize(c)) == c.
std::string serialize(const Config& config);

}  // namespace odmdi::config
