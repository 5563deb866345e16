#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "odmdi/detector.hpp"
#include "odmdi/errors.hpp"
#include "odmdi/keyrate.hpp"
#include "odmdi/quantum.hpp"

using namespace odmdi;
using namespace odmdi::keyrate;

namespace {

LinkBudget at(double km, bool midpoint = false) {
  LinkBudget l;
  l.distance_km = km;
  l.relay_at_midpoint = midpoint;
  return l;
}

const detector::DetectorParams kDefaults;

// Straight re-evaluation of the whole chain from the raw detector inputs.
double chain_rate(double p, double L, const detector::DetectorParams& d) {
  const double q = 1.0 - d.p_d;
  const double fire1 = 1.0 - q * (1.0 - d.eta_d);
  const double fire2 = 1.0 - q * (1.0 - d.eta_d) * (1.0 - d.eta_d);
  const double eta_z = 0.5 * q * q * (2.0 * d.p_d * fire2 + fire1 * fire1);
  const double eta_x = q * q * fire1 * fire1;
  const double dark = 2.0 * d.p_d * q * q * d.eta_d;
  const double t = std::pow(10.0, -d.alpha * L / 20.0);
  const double az = eta_z * t, ax = eta_x * t;
  const double yz = std::pow(1.0 - (1.0 - dark) * (1.0 - az), 2);
  const double yx = std::pow(1.0 - (1.0 - dark) * (1.0 - ax), 2);
  const double ez = 0.5 - p * az * az * (0.5 - d.e_d) / yz;
  const double ex = 0.5 - p * ax * ax * (0.5 - d.e_d) / yx;
  auto h = [](double x) { return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x); };
  return yz * (1.0 - h(ex)) - yz * d.f * h(ez);
}

quantum::Matrix projector(const quantum::Vector& v) { return v * v.adjoint(); }

// Disagreement probability of the two communication qubits measured in one basis,
// after the auxiliary pairs of werner_ghz(4, p) are swapped with |+> ancillas.
double exact_state_disagreement(double p, bool x_basis) {
  using quantum::basis_state;
  auto rho = quantum::werner_ghz(4, p);
  rho = tensor(rho, quantum::DensityOperator::from_pure(basis_state(Bb84Symbol::Plus)));
  rho = tensor(rho, quantum::DensityOperator::from_pure(basis_state(Bb84Symbol::Plus)));
  for (std::pair<int, int> pair : {std::pair{2, 4}, std::pair{3, 5}}) {
    auto m = quantum::measure(rho, quantum::bell_projector(BsmOutcome::PsiPlus, pair, 6));
    REQUIRE(m.post_state);
    rho = *m.post_state;
  }
  const std::array<int, 2> comm{0, 1};
  const auto ab = quantum::partial_trace(rho, comm);
  const auto s0 = basis_state(x_basis ? Bb84Symbol::Plus : Bb84Symbol::Zero);
  const auto s1 = basis_state(x_basis ? Bb84Symbol::Minus : Bb84Symbol::One);
  const quantum::Matrix disagree =
      projector(tensor(s0, s1).amplitudes()) + projector(tensor(s1, s0).amplitudes());
  return quantum::expectation(ab, quantum::MeasurementOperator(2, {0, 1}, disagree));
}

// Signal coincidences carry the state's error passed through a flip channel of
// strength e_d; every other coincidence (dark-count assisted) is random.
double exact_model_qber(double p, double eta_arm, double dark, double e_d, bool x_basis) {
  const double e_state = exact_state_disagreement(p, x_basis);
  const double e_signal = e_state * (1.0 - e_d) + (1.0 - e_state) * e_d;
  const double y11 = std::pow(1.0 - (1.0 - dark) * (1.0 - eta_arm), 2);
  const double signal = eta_arm * eta_arm;
  return (signal * e_signal + (y11 - signal) * 0.5) / y11;
}

}  // namespace

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.02) == doctest::Approx(0.141441).epsilon(1e-6));
  CHECK_THROWS_AS(binary_entropy(-0.01), ParameterError);
  CHECK_THROWS_AS(binary_entropy(1.01), ParameterError);
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    CHECK(std::abs(binary_entropy(x) - binary_entropy(1.0 - x)) < 1e-15);
  }
  // Concavity: midpoint value is at least the chord.
  for (int i = 0; i + 2 <= 100; ++i) {
    const double a = i / 100.0, b = (i + 2) / 100.0;
    const double mid = binary_entropy((a + b) / 2.0);
    CHECK(mid >= (binary_entropy(a) + binary_entropy(b)) / 2.0 - 1e-15);
  }
}

TEST_CASE("single-photon yield") {
  const detector::EquivalentDetector perfect{1.0, 1.0, 0.0};
  CHECK(yield_single_photon(at(0), perfect) == 1.0);
  const detector::EquivalentDetector blind{0.0, 0.0, 0.0};
  CHECK(yield_single_photon(at(0), blind) == 0.0);
  const auto eq = detector::equivalent_detector(kDefaults);
  CHECK(yield_single_photon(at(0), eq) == doctest::Approx(6.40e-3).epsilon(1e-3));
  CHECK(coincidence_yield(1.0, 1.0, 0.0) == 1.0);
}

TEST_CASE("error rates in the limits") {
  const detector::EquivalentDetector perfect{1.0, 1.0, 0.0};
  for (double e_d : {0.0, 0.02, 0.3}) {
    CHECK(std::abs(phase_error_xx(1.0, at(0), perfect, e_d) - e_d) < 1e-12);
    CHECK(std::abs(qber_zz(1.0, at(0), perfect, e_d) - e_d) < 1e-12);
  }
  const auto eq = detector::equivalent_detector(kDefaults);
  CHECK(phase_error_xx(0.0, at(100), eq, 0.02) == 0.5);
  CHECK(qber_zz(0.0, at(100), eq, 0.02) == 0.5);
  const detector::EquivalentDetector blind{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(phase_error_xx(1.0, at(0), blind, 0.02), UndefinedRateError);
  CHECK_THROWS_AS(qber_zz(1.0, at(0), blind, 0.02), UndefinedRateError);
}

TEST_CASE("qber_zz is nonincreasing in p") {
  const auto eq = detector::equivalent_detector(kDefaults);
  double last = 1.0;
  for (int i = 0; i <= 10; ++i) {
    const double e = qber_zz(i / 10.0, at(120), eq, kDefaults.e_d);
    CHECK(e <= last);
    last = e;
  }
}

TEST_CASE("formula error rates match the exact two-qubit state with detection statistics") {
  const auto eq = detector::equivalent_detector(kDefaults);
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> pdist(0.0, 1.0), ldist(0.0, 600.0);
  std::vector<std::pair<double, double>> points{{0.99, 0.0}};
  while (points.size() < 21) points.emplace_back(pdist(gen), ldist(gen));
  for (auto [p, L] : points) {
    const auto link = at(L);
    const double ax = link.arm_efficiency(eq.eta_x), az = link.arm_efficiency(eq.eta_z);
    const double ex = exact_model_qber(p, ax, eq.dark, kDefaults.e_d, true);
    const double ez = exact_model_qber(p, az, eq.dark, kDefaults.e_d, false);
    INFO("p=" << p << " L=" << L);
    CHECK(std::abs(phase_error_xx(p, link, eq, kDefaults.e_d) - ex) < 1e-9);
    CHECK(std::abs(qber_zz(p, link, eq, kDefaults.e_d) - ez) < 1e-9);
  }
}

TEST_CASE("realistic rate matches an independent evaluation of the chain") {
  const auto eq = detector::equivalent_detector(kDefaults);
  const auto pt = key_rate_realistic(1.0, at(0), eq, kDefaults);
  const double expected = chain_rate(1.0, 0.0, kDefaults);
  CHECK(expected > 0.0);
  CHECK(std::abs(pt.rate - expected) <= 1e-12 * expected);
  CHECK_FALSE(pt.clamped);
  CHECK(pt.gain_zz == doctest::Approx(yield_single_photon(at(0), eq)).epsilon(1e-15));

  const auto mid = key_rate_realistic(0.97, at(230), eq, kDefaults);
  CHECK(std::abs(mid.raw_rate - chain_rate(0.97, 230.0, kDefaults)) <= 1e-12 * std::abs(mid.raw_rate));
}

TEST_CASE("realistic rate at 100 dB and for a mixed source") {
  const auto eq = detector::equivalent_detector(kDefaults);
  CHECK(key_rate_realistic(1.0, at(500), eq, kDefaults).rate > 0.0);
  const auto zero = key_rate_realistic(0.0, at(0), eq, kDefaults);
  CHECK(zero.rate == 0.0);
  CHECK(zero.clamped);
  CHECK(zero.raw_rate < 0.0);
}

TEST_CASE("conference rate") {
  CHECK(key_rate_conference(1.0, 0.0, 0.0, 0.0, 1.16) == 1.0);
  CHECK(key_rate_conference(0.3, 0.01, 0.01, 0.5, 1.16) == 0.0);
  const double sym = key_rate_conference(0.2, 0.03, 0.03, 0.04, 1.1);
  CHECK(sym == key_rate_conference(0.2, 0.03, 0.01, 0.04, 1.1));
  CHECK(sym == key_rate_conference(0.2, 0.01, 0.03, 0.04, 1.1));
  CHECK(sym == doctest::Approx(0.2 * (1.0 - 1.1 * binary_entropy(0.03) - binary_entropy(0.04))));
}

TEST_CASE("transmittance identities") {
  for (double L : {0.0, 37.5, 250.0}) {
    LinkBudget one = at(L), two = at(L);
    two.alpha = 2.0 * one.alpha;
    CHECK(std::abs(two.transmittance() - one.transmittance() * one.transmittance()) < 1e-12);
    const auto mid = at(L, true);
    CHECK(std::abs(mid.transmittance() * mid.transmittance() - one.transmittance()) < 1e-12);
  }
  CHECK(at(100).transmittance() == doctest::Approx(0.1).epsilon(1e-12));
  double last = 2.0;
  for (int km = 0; km <= 700; km += 10) {
    const double t = at(km).arm_efficiency(0.5);
    CHECK(t <= last);
    last = t;
  }
  CHECK_THROWS_AS(at(-1).validate(), ParameterError);
}

TEST_CASE("sweep cutoffs: beyond 500 km at p = 1 and shrinking with p") {
  std::vector<double> grid;
  for (int km = 0; km <= 700; km += 10) grid.push_back(km);
  const auto report = sweep({1.0, 0.98, 0.96}, grid, kDefaults);
  REQUIRE(report.points.size() == 3 * grid.size());
  REQUIRE(report.cutoffs.size() == 3);
  for (const auto& c : report.cutoffs) REQUIRE(c.cutoff_km);
  CHECK(*report.cutoffs[0].cutoff_km >= 500.0);
  CHECK(*report.cutoffs[0].cutoff_km > *report.cutoffs[1].cutoff_km);
  CHECK(*report.cutoffs[1].cutoff_km > *report.cutoffs[2].cutoff_km);

  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& pt = report.points[i];
    const auto& cut = report.cutoffs[i / grid.size()];
    CHECK(pt.p == cut.p);
    if (pt.distance_km > *cut.cutoff_km + kCutoffResolutionKm) CHECK(pt.rate == 0.0);
    if (i % grid.size() != 0) CHECK(pt.rate <= report.points[i - 1].rate);
    CHECK(pt.qber_zz >= 0.0);
    CHECK(pt.phase_error_xx <= 0.5);
  }
  CHECK_THROWS_AS(sweep({}, grid, kDefaults), ParameterError);
  CHECK_THROWS_AS(sweep({1.0}, {}, kDefaults), ParameterError);
}

TEST_CASE("midpoint relays reach further") {
  const auto user_side = cutoff_distance(1.0, kDefaults, false);
  const auto midpoint = cutoff_distance(1.0, kDefaults, true);
  REQUIRE(user_side);
  REQUIRE(midpoint);
  CHECK(*midpoint > 1.9 * *user_side);
}

TEST_CASE("sweep serialization") {
  const auto report = sweep({1.0}, {0.0, 600.0}, kDefaults);
  std::ostringstream csv;
  write_csv(csv, report);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "#schema=1");
  std::getline(lines, line);
  CHECK(line == "p,distance_km,gain_zz,qber_zz,phase_error_xx,rate");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2);
  const std::string json = to_json(report);
  CHECK(json.find("\"points\"") != std::string::npos);
  CHECK(json.find("\"cutoffs\"") != std::string::npos);
}
