#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "odmdi/config.hpp"
#include "odmdi/errors.hpp"

using namespace odmdi;
using namespace odmdi::config;

namespace {

void expect_error(std::string_view text, std::string_view fragment) {
  try {
    parse(text).validate();
    FAIL("accepted: " << text);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("defaults follow the experimental parameter set") {
  const Config c;
  CHECK(c.detector.eta_d == 0.40);
  CHECK(c.detector.p_d == 8e-8);
  CHECK(c.detector.e_d == 0.02);
  CHECK(c.detector.f == 1.16);
  CHECK(c.detector.alpha == 0.2);
  CHECK(c.p_values == std::vector<double>{1.0, 0.98, 0.96});
  REQUIRE(c.distances_km.size() == 71);
  CHECK(c.distances_km.front() == 0.0);
  CHECK(c.distances_km.back() == 700.0);
  CHECK_FALSE(c.relay_at_midpoint);
  CHECK(c.format == OutputFormat::Csv);
  CHECK(c.output.empty());
  CHECK_NOTHROW(c.validate());
  CHECK(parse("") == c);
  CHECK(parse("# only a comment\n\n") == c);
}

TEST_CASE("parse reads keys, lists, ranges and comments") {
  const Config c = parse(
      "eta_d = 0.5  # better detectors\n"
      "p_values = 1, 0.9\n"
      "distances_km = 0:100:25\n"
      "relay_at_midpoint = true\n"
      "num_users = 5\n"
      "comm_users = 0, 3, 4\n"
      "rounds = 1000\n"
      "seed = 18446744073709551615\n"
      "format = json\n"
      "output = out.json\n");
  CHECK(c.detector.eta_d == 0.5);
  CHECK(c.p_values == std::vector<double>{1.0, 0.9});
  CHECK(c.distances_km == std::vector<double>{0, 25, 50, 75, 100});
  CHECK(c.relay_at_midpoint);
  CHECK(c.num_users == 5);
  CHECK(c.comm_users == std::vector<int>{0, 3, 4});
  CHECK(c.session.rounds == 1000);
  CHECK(c.session.seed == 18446744073709551615ull);
  CHECK(c.format == OutputFormat::Json);
  CHECK(c.output == "out.json");
  const auto t = c.topology();
  CHECK(t.num_users == 5);
  CHECK(t.comm_users == c.comm_users);
}

TEST_CASE("serialize round-trips") {
  Config c;
  c.detector.p_d = 1.2345678901234567e-9;
  c.p_values = {0.1, 1.0 / 3.0};
  c.distances_km = {0.0, 12.5, 1e3};
  c.aux_uniform_bases = true;
  c.session.basis_bias = 0.3;
  c.session.workers = 4;
  c.output = "x.csv";
  const std::string text = serialize(c);
  CHECK(parse(text) == c);
  CHECK(serialize(parse(text)) == text);
  CHECK(parse(serialize(Config{})) == Config{});
}

TEST_CASE("configuration errors name the problem") {
  expect_error("bogus = 1\n", "unknown key 'bogus'");
  expect_error("\n\neta_d 0.5\n", "line 3");
  expect_error("eta_d = abc\n", "eta_d");
  expect_error("rounds = -5\n", "rounds");
  expect_error("distances_km = 0:10:0\n", "distances_km");
  expect_error("format = xml\n", "format");
  expect_error("relay_at_midpoint = maybe\n", "relay_at_midpoint");
  expect_error("eta_d = 1.5\n", "");
  expect_error("comm_users = 0\n", "");
  expect_error("p_values = \n", "");
  Config big;
  big.num_users = 9;
  CHECK_THROWS_AS(big.validate(), CapacityError);
  CHECK_THROWS_AS(load("/nonexistent/odmdi.conf"), ConfigError);
}

TEST_CASE("load reads a file") {
  const auto path = std::filesystem::temp_directory_path() / "odmdi_test_config.conf";
  {
    std::ofstream out(path);
    out << "seed = 99\nmc_distance_km = 75\n";
  }
  const Config c = load(path.string());
  CHECK(c.session.seed == 99);
  CHECK(c.mc_distance_km == 75.0);
  std::filesystem::remove(path);
}
