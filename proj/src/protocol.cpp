#include "odmdi/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "odmdi/errors.hpp"

namespace odmdi {

std::string_view to_string(Bb84Symbol s) {
  switch (s) {
    case Bb84Symbol::Zero: return "H";
    case Bb84Symbol::One: return "V";
    case Bb84Symbol::Plus: return "D";
    case Bb84Symbol::Minus: return "A";
  }
  return "?";
}

std::string_view to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

std::string_view to_string(BsmOutcome o) {
  switch (o) {
    case BsmOutcome::PsiPlus: return "psi+";
    case BsmOutcome::PsiMinus: return "psi-";
    case BsmOutcome::Failure: return "fail";
  }
  return "?";
}

std::string_view to_string(PhiSign s) { return s == PhiSign::Plus ? "phi+" : "phi-"; }

std::optional<Bb84Symbol> parse_symbol(std::string_view text) {
  if (text == "H") return Bb84Symbol::Zero;
  if (text == "V") return Bb84Symbol::One;
  if (text == "D") return Bb84Symbol::Plus;
  if (text == "A") return Bb84Symbol::Minus;
  return std::nullopt;
}

std::optional<Basis> parse_basis(std::string_view text) {
  if (text == "Z") return Basis::Z;
  if (text == "X") return Basis::X;
  return std::nullopt;
}

std::optional<BsmOutcome> parse_outcome(std::string_view text) {
  if (text == "psi+") return BsmOutcome::PsiPlus;
  if (text == "psi-") return BsmOutcome::PsiMinus;
  if (text == "fail") return BsmOutcome::Failure;
  return std::nullopt;
}

}  // namespace odmdi

namespace odmdi::protocol {
namespace {

void require_success(BsmOutcome o, const char* what) {
  if (o == BsmOutcome::Failure) throw ContractViolation(std::string(what) + ": failed BSM has no equivalent");
}

struct Split {
  std::vector<Bb84Symbol> aux_symbols;
  std::vector<BsmOutcome> aux_bsm;
  bool aux_all_x = true;
};

Split split_aux(const RoundRecord& r) {
  Split s;
  const auto aux = r.aux_users();
  for (std::size_t i = 0; i < aux.size(); ++i) {
    const auto& announced = r.announced_aux_symbols[i];
    if (!announced) {
      s.aux_all_x = false;
      continue;
    }
    s.aux_symbols.push_back(*announced);
    s.aux_bsm.push_back(r.bsm[static_cast<std::size_t>(aux[i])]);
  }
  return s;
}

}  // namespace

std::string_view to_string(DiscardReason r) {
  switch (r) {
    case DiscardReason::BsmFailure: return "bsm_failure";
    case DiscardReason::BasisMismatch: return "basis_mismatch";
    case DiscardReason::AuxNotX: return "aux_not_x";
  }
  return "?";
}

std::vector<int> RoundRecord::aux_users() const {
  std::vector<int> aux;
  for (int u = 0; u < num_users(); ++u) {
    if (std::find(comm_users.begin(), comm_users.end(), u) == comm_users.end()) aux.push_back(u);
  }
  return aux;
}

void RoundRecord::validate() const {
  const auto n = bsm.size();
  auto fail = [&](const std::string& why) {
    throw ValidationError("round " + std::to_string(round_id) + ": " + why);
  };
  if (n < 2) fail("fewer than two users");
  if (preparations.size() != n) fail("preparation count does not match relay count");
  if (comm_users.size() < 2 || comm_users.size() > 3) fail("communication set must have 2 or 3 users");
  for (std::size_t i = 0; i < comm_users.size(); ++i) {
    const int u = comm_users[i];
    if (u < 0 || static_cast<std::size_t>(u) >= n) fail("communication user index out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (comm_users[j] == u) fail("communication users are not distinct");
    }
  }
  if (announced_bases.size() != comm_users.size()) fail("one announced basis per communication user required");
  for (std::size_t i = 0; i < comm_users.size(); ++i) {
    const auto& prep = preparations[static_cast<std::size_t>(comm_users[i])];
    if (!prep) fail("communication user preparation missing");
    if (basis_of(*prep) != announced_bases[i]) fail("announced basis disagrees with preparation");
  }
  const auto aux = aux_users();
  if (announced_aux_symbols.size() != aux.size()) fail("one announcement per auxiliary user required");
  for (std::size_t i = 0; i < aux.size(); ++i) {
    const auto& announced = announced_aux_symbols[i];
    if (announced && basis_of(*announced) != Basis::X) fail("auxiliary announcement must be an X symbol");
    const auto& prep = preparations[static_cast<std::size_t>(aux[i])];
    if (!prep) continue;
    if (basis_of(*prep) == Basis::X && announced != prep) fail("auxiliary announcement disagrees with preparation");
    if (basis_of(*prep) == Basis::Z && announced) fail("Z-basis auxiliary user announced a symbol");
  }
}

RoundRecord make_record(std::uint64_t round_id, std::vector<Bb84Symbol> preparations, std::vector<BsmOutcome> bsm,
                        std::vector<int> comm_users) {
  RoundRecord r;
  r.round_id = round_id;
  r.preparations.assign(preparations.begin(), preparations.end());
  r.bsm = std::move(bsm);
  r.comm_users = std::move(comm_users);
  for (int u : r.comm_users) {
    if (u < 0 || static_cast<std::size_t>(u) >= preparations.size()) {
      throw ValidationError("communication user index out of range");
    }
    r.announced_bases.push_back(basis_of(preparations[static_cast<std::size_t>(u)]));
  }
  if (preparations.size() == r.bsm.size()) {
    for (int u : r.aux_users()) {
      const Bb84Symbol s = preparations[static_cast<std::size_t>(u)];
      r.announced_aux_symbols.push_back(basis_of(s) == Basis::X ? std::optional<Bb84Symbol>(s) : std::nullopt);
    }
  }
  r.validate();
  return r;
}

quantum::MeasurementOperator PovmElement::to_operator(int num_qubits, int target) const {
  const quantum::PureState s = quantum::basis_state(state);
  return quantum::qubit_effect(s.amplitudes() * std::sqrt(weight), target, num_qubits,
                               std::string(odmdi::to_string(state)));
}

int sigma_parity(std::string_view signs) {
  int minus = 0;
  for (char c : signs) {
    if (c == '-') {
      ++minus;
    } else if (c != '+') {
      throw ParameterError(std::string("sign string may contain only '+' and '-', got '") + c + "'");
    }
  }
  return minus & 1;
}

int sigma_parity(std::span<const Bb84Symbol> x_symbols) {
  int minus = 0;
  for (auto s : x_symbols) {
    if (basis_of(s) != Basis::X) throw ContractViolation("sigma parity is defined on X symbols only");
    minus += s == Bb84Symbol::Minus ? 1 : 0;
  }
  return minus & 1;
}

PhiSign post_selected_sign(std::span<const Bb84Symbol> aux_symbols, std::span<const BsmOutcome> aux_bsm) {
  if (aux_symbols.size() != aux_bsm.size()) {
    throw ParameterError("auxiliary symbol and BSM strings differ in length");
  }
  // A psi- result flips the effective X projection (+ <-> -) on the GHZ qubit,
  // so the projected string is the symbol-wise XOR of the two.
  int parity = sigma_parity(aux_symbols);
  for (auto o : aux_bsm) {
    require_success(o, "tau parity");
    parity ^= parity_bit(o);
  }
  return sign_from_parity(parity);
}

int tau_parity(std::span<const Bb84Symbol> aux_symbols, std::span<const BsmOutcome> aux_bsm, BsmOutcome comm_first,
               BsmOutcome comm_second) {
  const PhiSign bell = post_selected_sign(aux_symbols, aux_bsm);
  require_success(comm_first, "tau parity");
  require_success(comm_second, "tau parity");
  return parity_bit(bell) ^ parity_bit(comm_first) ^ parity_bit(comm_second);
}

PovmElement povm_equivalent(Bb84Symbol aux_symbol, BsmOutcome bsm) {
  if (basis_of(aux_symbol) != Basis::X) throw ContractViolation("POVM correspondence needs an X-basis auxiliary state");
  require_success(bsm, "POVM correspondence");
  // psi+ keeps the auxiliary symbol, psi- swaps it.
  const bool swap = bsm == BsmOutcome::PsiMinus;
  const Bb84Symbol projected =
      swap ? (aux_symbol == Bb84Symbol::Plus ? Bb84Symbol::Minus : Bb84Symbol::Plus) : aux_symbol;
  return PovmElement{projected, 0.5};
}

PhiSign equivalent_bsm(PhiSign bell_a, BsmOutcome bsm1, BsmOutcome bsm2) {
  require_success(bsm1, "equivalent BSM");
  require_success(bsm2, "equivalent BSM");
  return sign_from_parity(parity_bit(bell_a) ^ parity_bit(bsm1) ^ parity_bit(bsm2));
}

bool flip_decision(Basis basis, PhiSign equivalent) { return basis == Basis::X && equivalent == PhiSign::Minus; }

PhiSign ghz_analyzer_equivalent(PhiSign ghz_a, BsmOutcome bsm1, BsmOutcome bsm2, BsmOutcome bsm3) {
  require_success(bsm1, "GHZ analyzer");
  require_success(bsm2, "GHZ analyzer");
  require_success(bsm3, "GHZ analyzer");
  return sign_from_parity(parity_bit(ghz_a) ^ parity_bit(bsm1) ^ parity_bit(bsm2) ^ parity_bit(bsm3));
}

SiftResult sift_round(const RoundRecord& record) {
  record.validate();
  if (record.comm_users.size() != 2) throw ValidationError("two-party sifting needs exactly two communication users");

  SiftResult out;
  if (std::any_of(record.bsm.begin(), record.bsm.end(), [](BsmOutcome o) { return !is_success(o); })) {
    out.discard_reason = DiscardReason::BsmFailure;
    return out;
  }
  const Split aux = split_aux(record);
  if (!aux.aux_all_x) {
    out.discard_reason = DiscardReason::AuxNotX;
    return out;
  }
  if (record.announced_bases[0] != record.announced_bases[1]) {
    out.discard_reason = DiscardReason::BasisMismatch;
    return out;
  }

  const int first = record.comm_users[0];
  const int second = record.comm_users[1];
  const int tau = tau_parity(aux.aux_symbols, aux.aux_bsm, record.bsm[static_cast<std::size_t>(first)],
                             record.bsm[static_cast<std::size_t>(second)]);
  const Basis basis = record.announced_bases[0];
  const PhiSign equivalent = sign_from_parity(tau);

  std::array<int, 2> bits{key_bit(*record.preparations[static_cast<std::size_t>(first)]),
                          key_bit(*record.preparations[static_cast<std::size_t>(second)])};
  if (flip_decision(basis, equivalent)) {
    bits[1] ^= 1;
    out.flip_user = second;
  }
  out.kept = true;
  out.bit_pair = bits;
  out.basis = basis;
  out.equivalent = equivalent;
  return out;
}

ConferenceSiftResult conference_sift_round(const RoundRecord& record) {
  record.validate();
  if (record.comm_users.size() != 3) throw ValidationError("conference sifting needs exactly three communication users");

  ConferenceSiftResult out;
  if (std::any_of(record.bsm.begin(), record.bsm.end(), [](BsmOutcome o) { return !is_success(o); })) {
    out.discard_reason = DiscardReason::BsmFailure;
    return out;
  }
  const Split aux = split_aux(record);
  if (!aux.aux_all_x) {
    out.discard_reason = DiscardReason::AuxNotX;
    return out;
  }
  const Basis basis = record.announced_bases[0];
  if (record.announced_bases[1] != basis || record.announced_bases[2] != basis) {
    out.discard_reason = DiscardReason::BasisMismatch;
    return out;
  }

  const PhiSign post = post_selected_sign(aux.aux_symbols, aux.aux_bsm);
  const auto& c = record.comm_users;
  const PhiSign analyzer = ghz_analyzer_equivalent(post, record.bsm[static_cast<std::size_t>(c[0])],
                                                   record.bsm[static_cast<std::size_t>(c[1])],
                                                   record.bsm[static_cast<std::size_t>(c[2])]);
  std::array<int, 3> bits{};
  for (std::size_t i = 0; i < 3; ++i) bits[i] = key_bit(*record.preparations[static_cast<std::size_t>(c[i])]);
  // X-basis outcomes of (|000> - |111>)/sqrt2 have odd parity; one flip by the
  // second-listed user restores the phi+ parity. Z correlations are sign-free.
  if (flip_decision(basis, analyzer)) {
    bits[1] ^= 1;
    out.flip_user = c[1];
  }
  out.kept = true;
  out.bits = bits;
  out.basis = basis;
  out.post_selected = post;
  out.analyzer = analyzer;
  return out;
}

}  // namespace odmdi::protocol
