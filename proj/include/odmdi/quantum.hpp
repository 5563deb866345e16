#pragma once

// Dense state-vector / density-matrix engine for small registers.
//
// Qubit ordering is big-endian: qubit 0 is the most significant bit of the
// amplitude index, so tensor(a, b) places a's qubits first. Polarization maps
// H -> |0>, V -> |1>.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "odmdi/alphabet.hpp"

namespace odmdi::quantum {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kPsdFloor = 1e-9;
inline constexpr double kNullProbability = 1e-12;
inline constexpr int kMaxRegisterQubits = 8;
inline constexpr int kMaxTensorQubits = 12;

namespace detail {
// Skips invariant checks; only for results of validity-preserving operations.
struct Trusted {};
}  // namespace detail

class PureState {
 public:
  // Throws DimensionError on a length mismatch, ParameterError if not normalized.
  PureState(int num_qubits, Vector amplitudes);

  static PureState computational(int num_qubits, std::size_t index);

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t index) const { return amplitudes_(static_cast<Eigen::Index>(index)); }
  double norm() const { return amplitudes_.norm(); }

  PureState(detail::Trusted, int num_qubits, Vector amplitudes)
      : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

 private:
  int num_qubits_;
  Vector amplitudes_;
};

class DensityOperator {
 public:
  // Full validation: Hermitian, unit trace, eigenvalues >= -kPsdFloor.
  DensityOperator(int num_qubits, Matrix matrix);

  static DensityOperator from_pure(const PureState& state);
  static DensityOperator maximally_mixed(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  Complex operator()(std::size_t row, std::size_t col) const {
    return matrix_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  double trace() const { return matrix_.trace().real(); }
  double purity() const;

  DensityOperator(detail::Trusted, int num_qubits, Matrix matrix)
      : num_qubits_(num_qubits), matrix_(std::move(matrix)) {}

 private:
  int num_qubits_;
  Matrix matrix_;
};

// A POVM effect acting on `targets` of an n-qubit register. Only the local
// 2^k x 2^k block is stored; dense() builds the embedded operator.
class MeasurementOperator {
 public:
  // Throws ParameterError unless local is Hermitian with spectrum in
  // [-kPsdFloor, 1 + kPsdFloor] and targets are distinct and in range.
  MeasurementOperator(int num_qubits, std::vector<int> targets, Matrix local, std::string label = {});

  int num_qubits() const { return num_qubits_; }
  const std::vector<int>& targets() const { return targets_; }
  const Matrix& local() const { return local_; }
  const std::string& label() const { return label_; }
  bool is_projector() const;
  Matrix dense() const;

 private:
  int num_qubits_;
  std::vector<int> targets_;
  Matrix local_;
  std::string label_;
};

struct MixedMeasurement {
  double probability = 0.0;
  // Empty when probability < kNullProbability.
  std::optional<DensityOperator> post_state;
};

struct PureMeasurement {
  double probability = 0.0;
  std::optional<PureState> post_state;
};

PureState basis_state(Bb84Symbol symbol);

// (|0...0> + |1...1>)/sqrt2 on n qubits, 2 <= n <= 8.
PureState ghz_state(int n);

// Same shape with a relative sign: (|0...0> + s|1...1>)/sqrt2.
PureState phi_state(int n, PhiSign sign);

// p |GHZ_n><GHZ_n| + (1-p)/2^n I.
DensityOperator werner_ghz(int n, double p);

PureState tensor(const PureState& a, const PureState& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

// Projector onto |psi+-> = (|01> +- |10>)/sqrt2 on (first, second), identity
// on the remaining qubits.
MeasurementOperator bell_projector(BsmOutcome outcome, std::pair<int, int> qubit_pair, int num_qubits);

// Rank-1 effect |v><v| (not necessarily normalized) on a single qubit.
MeasurementOperator qubit_effect(const Vector& v, int target, int num_qubits, std::string label = {});

// Born rule: p = tr(E rho); post = E rho E^dagger renormalized.
MixedMeasurement measure(const DensityOperator& state, const MeasurementOperator& op);

// Pure-state form; op must be a projector.
PureMeasurement measure(const PureState& state, const MeasurementOperator& op);

// Unnormalized E|psi>, for oracle code that needs amplitudes and phases.
Vector apply(const MeasurementOperator& op, const Vector& amplitudes);

// Kept qubits appear in ascending index order in the result.
DensityOperator partial_trace(const DensityOperator& state, std::span<const int> keep);

// Partial trace of an arbitrary square operator; used for POVM reductions.
Matrix partial_trace(const Matrix& op, int num_qubits, std::span<const int> keep);

DensityOperator apply_unitary(const DensityOperator& state, const Matrix& local, std::span<const int> targets);

Complex inner(const PureState& a, const PureState& b);

// tr(E rho) without building the post-measurement state.
double expectation(const DensityOperator& state, const MeasurementOperator& op);

// Embeds a local operator on `targets` into the full 2^n space.
Matrix embed(const Matrix& local, std::span<const int> targets, int num_qubits);

// Pauli helpers.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

}  // namespace odmdi::quantum
