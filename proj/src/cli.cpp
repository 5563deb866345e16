#include "odmdi/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "odmdi/config.hpp"
#include "odmdi/detector.hpp"
#include "odmdi/errors.hpp"
#include "odmdi/keyrate.hpp"
#include "odmdi/netsim.hpp"
#include "odmdi/records.hpp"

namespace odmdi::cli {
namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigFlags {
  std::string path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> rounds;
  std::optional<unsigned> workers;
  std::optional<int> users;
  std::optional<double> distance;
  std::optional<double> source_p;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool midpoint = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.path, "key = value config file (defaults apply to missing keys)");
  cmd->add_option("--set", f.sets, "override one config key, e.g. --set eta_d=0.5 (repeatable)");
  cmd->add_option("--seed", f.seed, "64-bit RNG seed");
  cmd->add_option("--rounds", f.rounds, "Monte Carlo rounds");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--users", f.users, "number of users N (at most 8)");
  cmd->add_option("--distance", f.distance, "Monte Carlo distance between the communication users, km");
  cmd->add_option("--source-p", f.source_p, "Werner weight of the Monte Carlo source");
  cmd->add_option("--out", f.out, "output path (default stdout)");
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--relay-at-midpoint", f.midpoint, "relays halfway along each link");
}

config::Config build_config(const ConfigFlags& f) {
  if (!f.path.empty() && !std::ifstream(f.path)) throw IoError("cannot read config file '" + f.path + "'");
  config::Config c = f.path.empty() ? config::Config{} : config::load(f.path);
  if (f.seed) c.session.seed = *f.seed;
  if (f.rounds) c.session.rounds = *f.rounds;
  if (f.workers) c.session.workers = *f.workers;
  if (f.users) c.num_users = *f.users;
  if (f.distance) c.mc_distance_km = *f.distance;
  if (f.source_p) c.source_p = *f.source_p;
  if (f.out) c.output = *f.out;
  if (f.format) config::set_value(c, "format", *f.format);
  if (f.midpoint) c.relay_at_midpoint = true;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    config::set_value(c, s.substr(0, eq), s.substr(eq + 1));
  }
  c.validate();
  return c;
}

// Writes `body` to `path`, or to `out` when the path is empty.
void emit(const std::string& path, std::ostream& out, const std::string& body) {
  if (path.empty()) {
    out << body;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << body;
  if (!file.flush()) throw IoError("write to '" + path + "' failed");
}

std::string sig2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2g", v);
  return buf;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_verify(const std::string& records_path, std::ostream& out, const verify::TableRules& rules) {
  verify::VerifyReport report = verify::verify_tables(rules);
  if (!records_path.empty()) {
    std::ifstream in(records_path);
    if (!in) throw IoError("cannot read records file '" + records_path + "'");
    std::vector<protocol::RoundRecord> recs;
    try {
      recs = records::read_records(in);
    } catch (const ValidationError& e) {
      verify::TableCheck bad{"records", 0, {e.what()}};
      report.checks.push_back(bad);
    }
    if (report.checks.back().name != "records") report.checks.push_back(verify::check_records(recs, rules));
  }
  verify::print_report(out, report);
  return report.passed() ? kOk : kVerifyFailed;
}

int cmd_detector(const config::Config& c, std::ostream& out) {
  const auto eq = detector::equivalent_detector(c.detector);
  std::string body;
  body += "equivalent detector (eta_d=" + full(c.detector.eta_d) + ", p_d=" + full(c.detector.p_d) + ")\n";
  body += "  eta_z  " + full(eq.eta_z) + "  (2 s.f.: " + sig2(eq.eta_z) + ")\n";
  body += "  eta_x  " + full(eq.eta_x) + "  (2 s.f.: " + sig2(eq.eta_x) + ")\n";
  body += "  dark   " + full(eq.dark) + "  (2 s.f.: " + sig2(eq.dark) + ")\n";
  body += "p_hh=" + full(detector::prob_bsm_same_pol(c.detector)) + "\n";
  body += "p_hv=" + full(detector::prob_bsm_diff_pol(c.detector)) + "\n";
  body += "eta_z=" + full(eq.eta_z) + "\n";
  body += "eta_x=" + full(eq.eta_x) + "\n";
  body += "dark=" + full(eq.dark) + "\n";
  body += "eta_z_2sf=" + sig2(eq.eta_z) + "\n";
  body += "eta_x_2sf=" + sig2(eq.eta_x) + "\n";
  body += "dark_2sf=" + sig2(eq.dark) + "\n";
  emit(c.output, out, body);
  return kOk;
}

int cmd_sweep(const config::Config& c, std::ostream& out, std::ostream& err) {
  const auto report = keyrate::sweep(c.p_values, c.distances_km, c.detector, c.relay_at_midpoint);
  std::string body;
  if (c.format == config::OutputFormat::Json) {
    body = keyrate::to_json(report);
  } else {
    std::ostringstream csv;
    keyrate::write_csv(csv, report);
    body = csv.str();
  }
  emit(c.output, out, body);
  std::ostream& log = c.output.empty() ? err : out;
  for (const auto& cut : report.cutoffs) {
    char line[96];
    if (cut.cutoff_km) {
      std::snprintf(line, sizeof line, "cutoff p=%g: %.1f km\n", cut.p, *cut.cutoff_km);
    } else {
      std::snprintf(line, sizeof line, "cutoff p=%g: none below %.0f km\n", cut.p, keyrate::kCutoffSearchLimitKm);
    }
    log << line;
  }
  return kOk;
}

int cmd_montecarlo(const config::Config& c, const std::string& records_path, bool check, std::ostream& out,
                   std::ostream& err) {
  const auto topology = c.topology();
  std::ofstream rec;
  netsim::RecordSink sink;
  if (!records_path.empty()) {
    rec.open(records_path, std::ios::binary);
    if (!rec) throw IoError("cannot open '" + records_path + "' for writing");
    sink = [&rec](const protocol::RoundRecord& r) { rec << records::to_json_line(r) << '\n'; };
  }
  const auto stats = netsim::run_session(topology, c.session, sink);
  if (rec.is_open() && !rec.flush()) throw IoError("write to '" + records_path + "' failed");
  emit(c.output, out, netsim::to_json(stats));

  std::ostream& log = c.output.empty() ? err : out;
  if (topology.comm_users.size() != 2) {
    log << "analytic comparison skipped: conference mode\n";
    return kOk;
  }
  bool within = true;
  for (const auto& cmp : netsim::compare_with_analytic(stats, topology)) {
    char line[200];
    if (!cmp.empirical || !cmp.z_score) {
      std::snprintf(line, sizeof line, "delta %-15s analytic=%.6g empirical=n/a n=%llu\n", cmp.quantity.c_str(),
                    cmp.analytic, static_cast<unsigned long long>(cmp.samples));
      within = false;
    } else {
      std::snprintf(line, sizeof line, "delta %-15s analytic=%.6g empirical=%.6g n=%llu delta=%+.2f sigma\n",
                    cmp.quantity.c_str(), cmp.analytic, *cmp.empirical, static_cast<unsigned long long>(cmp.samples),
                    *cmp.z_score);
      if (std::abs(*cmp.z_score) >= 3.0) within = false;
    }
    log << line;
  }
  if (check && !within) {
    log << "montecarlo: analytic agreement check FAILED (|delta| >= 3 sigma or empty estimate)\n";
    return kVerifyFailed;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const verify::TableRules& rules) {
  CLI::App app{"Open-destination MDI-QKD network simulator"};
  app.require_subcommand(1);

  auto* verify_cmd = app.add_subcommand("verify-tables", "check the sifting rules against exact projections");
  std::string verify_records;
  verify_cmd->add_option("--records", verify_records, "also re-sift a JSONL record file");

  ConfigFlags detector_flags, sweep_flags, mc_flags;
  auto* detector_cmd = app.add_subcommand("detector-params", "print the equivalent detector");
  add_config_flags(detector_cmd, detector_flags);
  auto* sweep_cmd = app.add_subcommand("sweep", "analytic key rate versus distance");
  add_config_flags(sweep_cmd, sweep_flags);
  auto* mc_cmd = app.add_subcommand("montecarlo", "simulate a session and compare with the analytic model");
  add_config_flags(mc_cmd, mc_flags);
  std::string mc_records;
  bool mc_check = false;
  mc_cmd->add_option("--records", mc_records, "write per-round records as JSONL");
  mc_cmd->add_flag("--check", mc_check, "exit 1 unless every analytic delta is below 3 sigma");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*verify_cmd) return cmd_verify(verify_records, out, rules);
    if (*detector_cmd) return cmd_detector(build_config(detector_flags), out);
    if (*sweep_cmd) return cmd_sweep(build_config(sweep_flags), out, err);
    if (*mc_cmd) return cmd_montecarlo(build_config(mc_flags), mc_records, mc_check, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n"
        << "hint: the exact-state backend holds at most 8 users; lower --users or num_users\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace odmdi::cli
