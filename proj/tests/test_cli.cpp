#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "odmdi/cli.hpp"

using namespace odmdi;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const verify::TableRules& rules = {}) {
  args.insert(args.begin(), "odmdi");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err, rules);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "odmdi_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("verify-tables passes with the shipped rules") {
  const auto r = run({"verify-tables"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("flip-table") != std::string::npos);
  CHECK(r.out.find("sifting-n4: 1024 rows") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("verify-tables names the table of an injected fault") {
  verify::TableRules bad;
  bad.flip = [](Basis b, PhiSign s) { return !protocol::flip_decision(b, s); };
  const auto r = run({"verify-tables"}, bad);
  CHECK(r.code == cli::kVerifyFailed);
  CHECK(r.out.find("flip-table") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);

  verify::TableRules bad_analyzer;
  bad_analyzer.ghz_analyzer = [](PhiSign s, BsmOutcome a, BsmOutcome b, BsmOutcome c) {
    const auto good = protocol::ghz_analyzer_equivalent(s, a, b, c);
    return a == BsmOutcome::PsiMinus && b == BsmOutcome::PsiMinus ? sign_from_parity(parity_bit(good) ^ 1) : good;
  };
  const auto r2 = run({"verify-tables"}, bad_analyzer);
  CHECK(r2.code == cli::kVerifyFailed);
  CHECK(r2.out.find("ghz-analyzer: 16 rows checked, 4 mismatches: FAIL") != std::string::npos);
}

TEST_CASE("detector-params prints the equivalent detector") {
  const auto r = run({"detector-params"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("eta_z_2sf=0.08\n") != std::string::npos);
  CHECK(r.out.find("eta_x_2sf=0.16\n") != std::string::npos);
  CHECK(r.out.find("dark_2sf=6.4e-08\n") != std::string::npos);
  const auto zero_dark = run({"detector-params", "--set", "p_d=0", "--set", "eta_d=0.5"});
  CHECK(zero_dark.out.find("eta_z=0.125\n") != std::string::npos);
  CHECK(zero_dark.out.find("eta_x=0.25\n") != std::string::npos);
}

TEST_CASE("sweep output is stable and reports cutoffs") {
  const auto a = run({"sweep", "--set", "distances_km=500", "--set", "p_values=1"});
  REQUIRE(a.code == cli::kOk);
  CHECK(a.out.rfind("#schema=1\np,distance_km,gain_zz,qber_zz,phase_error_xx,rate\n1,500,", 0) == 0);
  CHECK(a.err.find("cutoff p=1: 5") != std::string::npos);
  CHECK(run({"sweep", "--set", "distances_km=500", "--set", "p_values=1"}).out == a.out);

  const auto path = scratch("sweep.json");
  const auto j = run({"sweep", "--format", "json", "--out", path.string()});
  REQUIRE(j.code == cli::kOk);
  CHECK(slurp(path).find("\"cutoffs\"") != std::string::npos);
  CHECK(j.out.find("cutoff p=0.96") != std::string::npos);
}

TEST_CASE("montecarlo files are identical across runs and worker counts") {
  const auto out1 = scratch("mc1.json"), out2 = scratch("mc2.json"), out3 = scratch("mc3.json");
  const auto rec1 = scratch("mc1.jsonl"), rec3 = scratch("mc3.jsonl");
  const std::vector<std::string> base{"montecarlo", "--users", "3", "--rounds", "20000", "--seed", "77"};
  auto with = [&](std::vector<std::string> extra) {
    auto v = base;
    v.insert(v.end(), extra.begin(), extra.end());
    return run(v);
  };
  REQUIRE(with({"--out", out1.string(), "--records", rec1.string()}).code == cli::kOk);
  REQUIRE(with({"--out", out2.string()}).code == cli::kOk);
  REQUIRE(with({"--out", out3.string(), "--records", rec3.string(), "--workers", "3"}).code == cli::kOk);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(out1) == slurp(out3));
  CHECK(slurp(rec1) == slurp(rec3));
  CHECK(slurp(out1).find("\"rounds\": 20000") != std::string::npos);

  const auto verified = run({"verify-tables", "--records", rec1.string()});
  CHECK(verified.code == cli::kOk);
  CHECK(verified.out.find("records: 20000 rows") != std::string::npos);
}

TEST_CASE("montecarlo prints analytic deltas") {
  const auto r = run({"montecarlo", "--users", "2", "--rounds", "20000"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.err.find("delta gain_zz") != std::string::npos);
  CHECK(r.err.find("delta phase_error_xx") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"no-such-command"}).code == cli::kUsageError);
  CHECK(run({"sweep", "--format", "xml"}).code == cli::kUsageError);
  CHECK(run({"sweep", "--set", "bogus=1"}).code == cli::kUsageError);
  CHECK(run({"sweep", "--set", "eta_d"}).code == cli::kUsageError);
  CHECK(run({"sweep", "--config", "/nonexistent/odmdi.conf"}).code == cli::kIoError);
  CHECK(run({"sweep", "--out", "/nonexistent/dir/out.csv"}).code == cli::kIoError);
  CHECK(run({"verify-tables", "--records", "/nonexistent/r.jsonl"}).code == cli::kIoError);
  CHECK(run({"--help"}).code == cli::kOk);

  const auto cap = run({"montecarlo", "--users", "9", "--rounds", "10"});
  CHECK(cap.code == cli::kUsageError);
  CHECK(cap.err.find("at most 8") != std::string::npos);

  const auto bad = scratch("bad.jsonl");
  {
    std::ofstream f(bad);
    f << "{\"round\":0}\n";
  }
  const auto r = run({"verify-tables", "--records", bad.string()});
  CHECK(r.code == cli::kVerifyFailed);
  CHECK(r.out.find("line 1") != std::string::npos);
}

TEST_CASE("config file and flags combine") {
  const auto conf = scratch("c.conf");
  {
    std::ofstream f(conf);
    f << "p_values = 0.98\ndistances_km = 100\n";
  }
  const auto r = run({"sweep", "--config", conf.string(), "--set", "distances_km=200"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("\n0.98,200,") != std::string::npos);
  CHECK(r.out.find(",100,") == std::string::npos);
}
