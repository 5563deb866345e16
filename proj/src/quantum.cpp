#include "odmdi/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "odmdi/errors.hpp"

namespace odmdi::quantum {
namespace {

std::size_t dim_of(int num_qubits) { return std::size_t{1} << num_qubits; }

std::size_t bit_mask(int qubit, int num_qubits) {
  return std::size_t{1} << (num_qubits - 1 - qubit);
}

void check_targets(std::span<const int> targets, int num_qubits) {
  if (targets.empty()) throw ParameterError("target set is empty");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= num_qubits) {
      throw ParameterError("qubit index " + std::to_string(targets[i]) + " out of range for " +
                           std::to_string(num_qubits) + " qubits");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) throw ParameterError("repeated qubit index " + std::to_string(targets[i]));
    }
  }
}

// Full-register indices addressed by each local basis state, for every
// assignment of the untouched qubits. groups[g][j] is the full index whose
// target bits spell j (big-endian over `targets`).
std::vector<std::vector<std::size_t>> index_groups(std::span<const int> targets, int num_qubits) {
  const std::size_t k = targets.size();
  std::size_t target_mask = 0;
  for (int t : targets) target_mask |= bit_mask(t, num_qubits);

  std::vector<std::size_t> offsets(std::size_t{1} << k, 0);
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    for (std::size_t m = 0; m < k; ++m) {
      if (j & (std::size_t{1} << (k - 1 - m))) offsets[j] |= bit_mask(targets[m], num_qubits);
    }
  }

  std::vector<std::vector<std::size_t>> groups;
  const std::size_t dim = dim_of(num_qubits);
  groups.reserve(dim >> k);
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    std::vector<std::size_t> g(offsets.size());
    for (std::size_t j = 0; j < offsets.size(); ++j) g[j] = base | offsets[j];
    groups.push_back(std::move(g));
  }
  return groups;
}

// Returns (L (x) I) * m without forming the embedded operator.
Matrix apply_left(const Matrix& local, std::span<const int> targets, int num_qubits, const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  const auto groups = index_groups(targets, num_qubits);
  const auto k = local.rows();
  Vector gathered(k);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (const auto& g : groups) {
      for (Eigen::Index j = 0; j < k; ++j) gathered(j) = m(static_cast<Eigen::Index>(g[j]), c);
      const Vector mixed = local * gathered;
      for (Eigen::Index j = 0; j < k; ++j) out(static_cast<Eigen::Index>(g[j]), c) = mixed(j);
    }
  }
  return out;
}

// L rho L^dagger for Hermitian rho.
Matrix conjugate(const Matrix& local, std::span<const int> targets, int num_qubits, const Matrix& rho) {
  const Matrix left = apply_left(local, targets, num_qubits, rho);
  const Matrix left_adj = left.adjoint();
  return apply_left(local, targets, num_qubits, left_adj);
}

bool is_hermitian(const Matrix& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

PureState::PureState(int num_qubits, Vector amplitudes) : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
  if (num_qubits < 1 || num_qubits > kMaxTensorQubits) {
    throw DimensionError("pure state qubit count " + std::to_string(num_qubits) + " outside [1, " +
                         std::to_string(kMaxTensorQubits) + "]");
  }
  if (static_cast<std::size_t>(amplitudes_.size()) != dim_of(num_qubits)) {
    throw DimensionError("amplitude vector length " + std::to_string(amplitudes_.size()) + " does not match 2^" +
                         std::to_string(num_qubits));
  }
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > kNormTolerance) {
    throw ParameterError("pure state is not normalized");
  }
}

PureState PureState::computational(int num_qubits, std::size_t index) {
  if (num_qubits < 1 || num_qubits > kMaxTensorQubits) throw DimensionError("qubit count out of range");
  if (index >= dim_of(num_qubits)) throw ParameterError("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_of(num_qubits)));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(detail::Trusted{}, num_qubits, std::move(v));
}

DensityOperator::DensityOperator(int num_qubits, Matrix matrix) : num_qubits_(num_qubits), matrix_(std::move(matrix)) {
  if (num_qubits < 1 || num_qubits > kMaxTensorQubits) throw DimensionError("density operator qubit count out of range");
  const auto dim = static_cast<Eigen::Index>(dim_of(num_qubits));
  if (matrix_.rows() != dim || matrix_.cols() != dim) throw DimensionError("density matrix is not 2^n x 2^n");
  if (!is_hermitian(matrix_, kNormTolerance)) throw ParameterError("density matrix is not Hermitian");
  if (std::abs(matrix_.trace().real() - 1.0) > kNormTolerance || std::abs(matrix_.trace().imag()) > kNormTolerance) {
    throw ParameterError("density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPsdFloor) throw ParameterError("density matrix is not positive semidefinite");
}

DensityOperator DensityOperator::from_pure(const PureState& state) {
  const Vector& a = state.amplitudes();
  return DensityOperator(detail::Trusted{}, state.num_qubits(), a * a.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxTensorQubits) throw DimensionError("qubit count out of range");
  const auto dim = static_cast<Eigen::Index>(dim_of(num_qubits));
  return DensityOperator(detail::Trusted{}, num_qubits, Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityOperator::purity() const { return (matrix_ * matrix_).trace().real(); }

MeasurementOperator::MeasurementOperator(int num_qubits, std::vector<int> targets, Matrix local, std::string label)
    : num_qubits_(num_qubits), targets_(std::move(targets)), local_(std::move(local)), label_(std::move(label)) {
  if (num_qubits < 1 || num_qubits > kMaxTensorQubits) throw DimensionError("measurement qubit count out of range");
  check_targets(targets_, num_qubits_);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << targets_.size());
  if (local_.rows() != dim || local_.cols() != dim) throw DimensionError("local effect size does not match targets");
  if (!is_hermitian(local_, kNormTolerance)) throw ParameterError("measurement effect is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(local_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPsdFloor || solver.eigenvalues().maxCoeff() > 1.0 + kPsdFloor) {
    throw ParameterError("measurement effect spectrum outside [0, 1]");
  }
}

bool MeasurementOperator::is_projector() const {
  return (local_ * local_ - local_).cwiseAbs().maxCoeff() <= kNormTolerance;
}

Matrix MeasurementOperator::dense() const { return embed(local_, targets_, num_qubits_); }

Matrix embed(const Matrix& local, std::span<const int> targets, int num_qubits) {
  check_targets(targets, num_qubits);
  const auto dim = static_cast<Eigen::Index>(dim_of(num_qubits));
  return apply_left(local, targets, num_qubits, Matrix::Identity(dim, dim));
}

PureState basis_state(Bb84Symbol symbol) {
  const double h = std::numbers::sqrt2 / 2.0;
  Vector v(2);
  switch (symbol) {
    case Bb84Symbol::Zero: v << 1.0, 0.0; break;
    case Bb84Symbol::One: v << 0.0, 1.0; break;
    case Bb84Symbol::Plus: v << h, h; break;
    case Bb84Symbol::Minus: v << h, -h; break;
  }
  return PureState(detail::Trusted{}, 1, std::move(v));
}

PureState phi_state(int n, PhiSign sign) {
  if (n < 2 || n > kMaxRegisterQubits) {
    throw DimensionError("GHZ register size " + std::to_string(n) + " outside [2, " +
                         std::to_string(kMaxRegisterQubits) + "]");
  }
  const auto dim = static_cast<Eigen::Index>(dim_of(n));
  Vector v = Vector::Zero(dim);
  const double h = std::numbers::sqrt2 / 2.0;
  v(0) = h;
  v(dim - 1) = sign == PhiSign::Plus ? h : -h;
  return PureState(detail::Trusted{}, n, std::move(v));
}

PureState ghz_state(int n) { return phi_state(n, PhiSign::Plus); }

DensityOperator werner_ghz(int n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("Werner weight must lie in [0, 1]");
  const PureState ghz = ghz_state(n);
  const auto dim = static_cast<Eigen::Index>(ghz.dimension());
  Matrix m = p * (ghz.amplitudes() * ghz.amplitudes().adjoint());
  m += Matrix::Identity(dim, dim) * ((1.0 - p) / static_cast<double>(dim));
  return DensityOperator(detail::Trusted{}, n, std::move(m));
}

PureState tensor(const PureState& a, const PureState& b) {
  const int n = a.num_qubits() + b.num_qubits();
  if (n > kMaxTensorQubits) throw CapacityError("tensor product exceeds " + std::to_string(kMaxTensorQubits) + " qubits");
  const auto& va = a.amplitudes();
  const auto& vb = b.amplitudes();
  Vector out(va.size() * vb.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) out.segment(i * vb.size(), vb.size()) = va(i) * vb;
  return PureState(detail::Trusted{}, n, std::move(out));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  const int n = a.num_qubits() + b.num_qubits();
  if (n > kMaxTensorQubits) throw CapacityError("tensor product exceeds " + std::to_string(kMaxTensorQubits) + " qubits");
  const auto& ma = a.matrix();
  const auto& mb = b.matrix();
  const auto db = mb.rows();
  Matrix out(ma.rows() * db, ma.cols() * db);
  for (Eigen::Index i = 0; i < ma.rows(); ++i) {
    for (Eigen::Index j = 0; j < ma.cols(); ++j) out.block(i * db, j * db, db, db) = ma(i, j) * mb;
  }
  return DensityOperator(detail::Trusted{}, n, std::move(out));
}

MeasurementOperator bell_projector(BsmOutcome outcome, std::pair<int, int> qubit_pair, int num_qubits) {
  if (outcome == BsmOutcome::Failure) throw ParameterError("no projector for a failed BSM");
  if (qubit_pair.first == qubit_pair.second) throw ParameterError("Bell projector needs two distinct qubits");
  const double h = std::numbers::sqrt2 / 2.0;
  Vector psi = Vector::Zero(4);
  psi(1) = h;
  psi(2) = outcome == BsmOutcome::PsiPlus ? h : -h;
  return MeasurementOperator(num_qubits, {qubit_pair.first, qubit_pair.second}, psi * psi.adjoint(),
                             std::string(to_string(outcome)));
}

MeasurementOperator qubit_effect(const Vector& v, int target, int num_qubits, std::string label) {
  if (v.size() != 2) throw DimensionError("single-qubit effect needs a 2-vector");
  return MeasurementOperator(num_qubits, {target}, v * v.adjoint(), std::move(label));
}

double expectation(const DensityOperator& state, const MeasurementOperator& op) {
  if (state.num_qubits() != op.num_qubits()) throw ParameterError("measurement dimension mismatch");
  // tr(E rho) = tr(E_local rho_targets).
  const Matrix reduced = partial_trace(state.matrix(), state.num_qubits(), op.targets());
  // partial_trace orders kept qubits ascending; reorder the effect to match.
  std::vector<int> sorted = op.targets();
  std::sort(sorted.begin(), sorted.end());
  if (sorted == op.targets()) return (op.local() * reduced).trace().real();
  return (op.dense() * state.matrix()).trace().real();
}

MixedMeasurement measure(const DensityOperator& state, const MeasurementOperator& op) {
  if (state.num_qubits() != op.num_qubits()) throw ParameterError("measurement dimension mismatch");
  MixedMeasurement result;
  result.probability = std::max(0.0, expectation(state, op));
  if (result.probability < kNullProbability) return result;
  Matrix post = conjugate(op.local(), op.targets(), state.num_qubits(), state.matrix());
  const double tr = post.trace().real();
  if (tr < kNullProbability) return result;
  post /= tr;
  result.post_state = DensityOperator(detail::Trusted{}, state.num_qubits(), std::move(post));
  return result;
}

Vector apply(const MeasurementOperator& op, const Vector& amplitudes) {
  if (static_cast<std::size_t>(amplitudes.size()) != dim_of(op.num_qubits())) {
    throw ParameterError("measurement dimension mismatch");
  }
  return apply_left(op.local(), op.targets(), op.num_qubits(), amplitudes);
}

PureMeasurement measure(const PureState& state, const MeasurementOperator& op) {
  if (state.num_qubits() != op.num_qubits()) throw ParameterError("measurement dimension mismatch");
  if (!op.is_projector()) throw ParameterError("pure-state measurement requires a projector");
  Vector projected = apply(op, state.amplitudes());
  PureMeasurement result;
  result.probability = projected.squaredNorm();
  if (result.probability < kNullProbability) return result;
  projected /= std::sqrt(result.probability);
  result.post_state = PureState(detail::Trusted{}, state.num_qubits(), std::move(projected));
  return result;
}

Matrix partial_trace(const Matrix& op, int num_qubits, std::span<const int> keep) {
  check_targets(keep, num_qubits);
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  std::vector<int> traced;
  for (int q = 0; q < num_qubits; ++q) {
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);
  }
  const std::size_t kdim = std::size_t{1} << kept.size();
  const std::size_t tdim = std::size_t{1} << traced.size();

  auto spread = [&](const std::vector<int>& qubits, std::size_t local) {
    std::size_t full = 0;
    const std::size_t k = qubits.size();
    for (std::size_t m = 0; m < k; ++m) {
      if (local & (std::size_t{1} << (k - 1 - m))) full |= bit_mask(qubits[m], num_qubits);
    }
    return full;
  };
  std::vector<std::size_t> kept_index(kdim), traced_index(tdim);
  for (std::size_t i = 0; i < kdim; ++i) kept_index[i] = spread(kept, i);
  for (std::size_t t = 0; t < tdim; ++t) traced_index[t] = spread(traced, t);

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(kdim));
  for (std::size_t r = 0; r < kdim; ++r) {
    for (std::size_t c = 0; c < kdim; ++c) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < tdim; ++t) {
        acc += op(static_cast<Eigen::Index>(kept_index[r] | traced_index[t]),
                  static_cast<Eigen::Index>(kept_index[c] | traced_index[t]));
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& state, std::span<const int> keep) {
  if (keep.empty()) throw ParameterError("partial trace needs a nonempty keep set");
  Matrix reduced = partial_trace(state.matrix(), state.num_qubits(), keep);
  return DensityOperator(detail::Trusted{}, static_cast<int>(keep.size()), std::move(reduced));
}

DensityOperator apply_unitary(const DensityOperator& state, const Matrix& local, std::span<const int> targets) {
  check_targets(targets, state.num_qubits());
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << targets.size());
  if (local.rows() != dim || local.cols() != dim) throw DimensionError("unitary size does not match targets");
  if ((local * local.adjoint() - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > kNormTolerance) {
    throw ParameterError("operator is not unitary");
  }
  return DensityOperator(detail::Trusted{}, state.num_qubits(),
                         conjugate(local, targets, state.num_qubits(), state.matrix()));
}

Complex inner(const PureState& a, const PureState& b) {
  if (a.num_qubits() != b.num_qubits()) throw ParameterError("inner product dimension mismatch");
  return a.amplitudes().dot(b.amplitudes());
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace odmdi::quantum
