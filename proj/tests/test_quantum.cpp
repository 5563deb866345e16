#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "odmdi/errors.hpp"
#include "odmdi/quantum.hpp"

using namespace odmdi;
using namespace odmdi::quantum;

namespace {

const double kH = std::numbers::sqrt2 / 2.0;

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Matrix phi_plus_projector() {
  const Vector v = ghz_state(2).amplitudes();
  return v * v.adjoint();
}

}  // namespace

TEST_CASE("basis states have the documented amplitudes") {
  const auto zero = basis_state(Bb84Symbol::Zero);
  CHECK(zero.amplitude(0) == Complex(1, 0));
  CHECK(zero.amplitude(1) == Complex(0, 0));
  const auto one = basis_state(Bb84Symbol::One);
  CHECK(one.amplitude(1) == Complex(1, 0));
  const auto plus = basis_state(Bb84Symbol::Plus);
  CHECK(std::abs(plus.amplitude(0) - kH) < 1e-15);
  CHECK(std::abs(plus.amplitude(1) - kH) < 1e-15);
  const auto minus = basis_state(Bb84Symbol::Minus);
  CHECK(std::abs(minus.amplitude(0) - kH) < 1e-15);
  CHECK(std::abs(minus.amplitude(1) + kH) < 1e-15);
}

TEST_CASE("ghz_state puts 1/sqrt2 on the two extreme indices") {
  for (int n = 2; n <= 8; ++n) {
    const auto g = ghz_state(n);
    CHECK(g.dimension() == (std::size_t{1} << n));
    for (std::size_t i = 0; i < g.dimension(); ++i) {
      const double expected = (i == 0 || i + 1 == g.dimension()) ? kH : 0.0;
      CHECK(std::abs(g.amplitude(i) - expected) < 1e-15);
    }
  }
  CHECK_THROWS_AS(ghz_state(1), DimensionError);
  CHECK_THROWS_AS(ghz_state(9), DimensionError);
}

TEST_CASE("ghz_state(3) in the X basis has only even-parity outcomes") {
  // <+++|GHZ3> = 2 / (sqrt8 sqrt2) = 1/2, so each even-parity pattern has probability 1/4.
  double even = 0.0;
  for (int m = 0; m < 8; ++m) {
    PureState s = basis_state((m & 4) ? Bb84Symbol::Minus : Bb84Symbol::Plus);
    s = tensor(s, basis_state((m & 2) ? Bb84Symbol::Minus : Bb84Symbol::Plus));
    s = tensor(s, basis_state((m & 1) ? Bb84Symbol::Minus : Bb84Symbol::Plus));
    const double prob = std::norm(inner(s, ghz_state(3)));
    const bool odd = ((m >> 2) ^ (m >> 1) ^ m) & 1;
    CHECK(prob == doctest::Approx(odd ? 0.0 : 0.25).epsilon(1e-12));
    if (!odd) even += prob;
  }
  CHECK(even == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("werner_ghz limits and trace") {
  const auto pure = werner_ghz(4, 1.0);
  const Vector g = ghz_state(4).amplitudes();
  CHECK(max_abs_diff(pure.matrix(), g * g.adjoint()) < 1e-15);
  const auto mixed = werner_ghz(4, 0.0);
  CHECK(max_abs_diff(mixed.matrix(), Matrix::Identity(16, 16) / 16.0) < 1e-15);
  CHECK(werner_ghz(4, 0.7).trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(werner_ghz(4, 1.1), ParameterError);
  CHECK_THROWS_AS(werner_ghz(4, -0.1), ParameterError);
}

TEST_CASE("werner_ghz purity is strictly increasing in p") {
  double last = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double purity = werner_ghz(4, i / 10.0).purity();
    CHECK(purity > last);
    last = purity;
  }
}

TEST_CASE("tensor follows left-factor-first ordering") {
  const auto s = tensor(basis_state(Bb84Symbol::Zero), basis_state(Bb84Symbol::One));
  CHECK(s.amplitude(1) == Complex(1, 0));
  CHECK(std::abs(s.amplitude(2)) == 0.0);
  const auto pp = tensor(basis_state(Bb84Symbol::Plus), basis_state(Bb84Symbol::Plus));
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(pp.amplitude(i) - 0.5) < 1e-15);
  CHECK(pp.norm() == doctest::Approx(1.0));
  const auto big = tensor(ghz_state(8), ghz_state(4));
  CHECK(big.num_qubits() == 12);
  CHECK_THROWS_AS(tensor(big, basis_state(Bb84Symbol::Zero)), CapacityError);
}

TEST_CASE("checked constructors enforce the invariants") {
  Vector v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(PureState(1, v), ParameterError);
  CHECK_THROWS_AS(PureState(2, Vector::Ones(2) * kH), DimensionError);
  Matrix not_psd(2, 2);
  not_psd << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(DensityOperator(1, not_psd), ParameterError);
  Matrix not_herm(2, 2);
  not_herm << 0.5, 0.1, 0.0, 0.5;
  CHECK_THROWS_AS(DensityOperator(1, not_herm), ParameterError);
  Matrix too_big = Matrix::Identity(2, 2) * 1.5;
  CHECK_THROWS_AS(MeasurementOperator(1, {0}, too_big), ParameterError);
}

TEST_CASE("bell projector matrix elements") {
  const auto minus = bell_projector(BsmOutcome::PsiMinus, {0, 1}, 2).dense();
  CHECK(std::abs(minus(1, 1) - 0.5) < 1e-15);
  for (auto o : {BsmOutcome::PsiPlus, BsmOutcome::PsiMinus}) {
    CHECK(std::abs(bell_projector(o, {0, 1}, 2).dense()(0, 0)) < 1e-15);
    CHECK(bell_projector(o, {2, 0}, 3).is_projector());
  }
  CHECK_THROWS_AS(bell_projector(BsmOutcome::PsiPlus, {1, 1}, 3), ParameterError);
  CHECK_THROWS_AS(bell_projector(BsmOutcome::PsiPlus, {0, 3}, 3), ParameterError);
}

TEST_CASE("entanglement swapping leaves the outer qubits maximally entangled") {
  const auto joint = tensor(ghz_state(2), ghz_state(2));
  const auto m = measure(joint, bell_projector(BsmOutcome::PsiPlus, {1, 2}, 4));
  REQUIRE(m.post_state);
  const std::array<int, 2> outer{0, 3};
  const auto reduced = partial_trace(DensityOperator::from_pure(*m.post_state), outer);
  // Pure reduced state on (0,3) with maximally mixed marginals.
  CHECK(reduced.purity() == doctest::Approx(1.0).epsilon(1e-10));
  const std::array<int, 1> first{0};
  CHECK(max_abs_diff(partial_trace(reduced, first).matrix(), Matrix::Identity(2, 2) / 2.0) < 1e-10);
}

TEST_CASE("measure examples") {
  const auto zero = DensityOperator::from_pure(basis_state(Bb84Symbol::Zero));
  const auto proj0 = qubit_effect(basis_state(Bb84Symbol::Zero).amplitudes(), 0, 1);
  auto m = measure(zero, proj0);
  CHECK(m.probability == doctest::Approx(1.0));
  REQUIRE(m.post_state);
  CHECK(max_abs_diff(m.post_state->matrix(), zero.matrix()) < 1e-12);

  m = measure(DensityOperator::maximally_mixed(1), proj0);
  CHECK(m.probability == doctest::Approx(0.5));
  REQUIRE(m.post_state);
  CHECK(max_abs_diff(m.post_state->matrix(), zero.matrix()) < 1e-12);

  const auto proj1 = qubit_effect(basis_state(Bb84Symbol::One).amplitudes(), 0, 1);
  m = measure(zero, proj1);
  CHECK(m.probability < kNullProbability);
  CHECK_FALSE(m.post_state);

  CHECK_THROWS_AS(measure(werner_ghz(2, 1.0), proj0), ParameterError);
}

TEST_CASE("complete projector sets sum to one") {
  // Computational basis on a random-ish mixed state, and the Bell set with its complement.
  const auto rho = werner_ghz(3, 0.37);
  double total = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const Vector e = PureState::computational(3, i).amplitudes();
    total += measure(rho, MeasurementOperator(3, {0, 1, 2}, e * e.adjoint())).probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

  const auto joint = tensor(werner_ghz(2, 0.6), DensityOperator::from_pure(basis_state(Bb84Symbol::Minus)));
  const auto plus = bell_projector(BsmOutcome::PsiPlus, {1, 2}, 3);
  const auto minus = bell_projector(BsmOutcome::PsiMinus, {1, 2}, 3);
  const Matrix rest = Matrix::Identity(4, 4) - plus.local() - minus.local();
  const double sum = expectation(joint, plus) + expectation(joint, minus) +
                     expectation(joint, MeasurementOperator(3, {1, 2}, rest));
  CHECK(std::abs(sum - 1.0) < 1e-10);
}

TEST_CASE("partial trace examples") {
  const std::array<int, 1> first{0};
  const auto phi = DensityOperator::from_pure(ghz_state(2));
  CHECK(max_abs_diff(partial_trace(phi, first).matrix(), Matrix::Identity(2, 2) / 2.0) < 1e-12);

  const auto rho = werner_ghz(2, 0.3);
  const auto sigma = DensityOperator::from_pure(basis_state(Bb84Symbol::Plus));
  const std::array<int, 2> keep{0, 1};
  CHECK(max_abs_diff(partial_trace(tensor(rho, sigma), keep).matrix(), rho.matrix()) < 1e-12);
  const std::array<int, 1> last{2};
  CHECK(max_abs_diff(partial_trace(tensor(rho, sigma), last).matrix(), sigma.matrix()) < 1e-12);

  // Kept qubits come out in ascending order whatever order they are listed in.
  const auto prod = tensor(DensityOperator::from_pure(basis_state(Bb84Symbol::Zero)),
                           DensityOperator::from_pure(basis_state(Bb84Symbol::One)));
  const std::array<int, 2> swapped{1, 0};
  const Matrix r = partial_trace(prod, swapped).matrix();
  CHECK(std::abs(r(1, 1) - 1.0) < 1e-12);

  const auto big = werner_ghz(5, 0.8);
  const std::array<int, 2> some{1, 3};
  CHECK(partial_trace(big, some).trace() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(partial_trace(big, std::span<const int>{}), ParameterError);
}

TEST_CASE("swapping the auxiliary pairs of werner_ghz(4,p) leaves a Werner pair") {
  for (double p : {0.0, 0.35, 0.9, 1.0}) {
    auto rho = werner_ghz(4, p);
    rho = tensor(rho, DensityOperator::from_pure(basis_state(Bb84Symbol::Plus)));
    rho = tensor(rho, DensityOperator::from_pure(basis_state(Bb84Symbol::Plus)));
    for (auto [pair, outcome] : {std::pair{std::pair{2, 4}, BsmOutcome::PsiPlus},
                                 std::pair{std::pair{3, 5}, BsmOutcome::PsiPlus}}) {
      auto m = measure(rho, bell_projector(outcome, pair, 6));
      REQUIRE(m.post_state);
      rho = *m.post_state;
    }
    const std::array<int, 2> comm{0, 1};
    const Matrix expected = p * phi_plus_projector() + (1.0 - p) / 4.0 * Matrix::Identity(4, 4);
    CHECK(max_abs_diff(partial_trace(rho, comm).matrix(), expected) < 1e-10);
  }
}

TEST_CASE("apply_unitary with a Pauli flips a basis state") {
  const auto zero = DensityOperator::from_pure(basis_state(Bb84Symbol::Zero));
  const std::array<int, 1> t{0};
  const auto flipped = apply_unitary(zero, pauli_x(), t);
  CHECK(std::abs(flipped(1, 1) - 1.0) < 1e-15);
  CHECK_THROWS_AS(apply_unitary(zero, Matrix::Identity(2, 2) * 2.0, t), ParameterError);
}
