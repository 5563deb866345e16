#pragma once

// Discrete protocol layer: announcement semantics and sifting for the
// two-party (N,2) mode and the three-party conference (N,3) mode.
//
// Relay k measures GHZ photon k together with the photon of user k, so user
// indices double as relay indices. Auxiliary users are every user outside
// comm_users, taken in ascending index order.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "odmdi/alphabet.hpp"
#include "odmdi/quantum.hpp"

namespace odmdi::protocol {

struct RoundRecord {
  std::uint64_t round_id = 0;
  // Private preparation per user. Auxiliary entries may be absent when the
  // record was rebuilt from public announcements only.
  std::vector<std::optional<Bb84Symbol>> preparations;
  std::vector<BsmOutcome> bsm;
  std::vector<int> comm_users;
  std::vector<Basis> announced_bases;
  // One entry per auxiliary user: the announced X symbol, or empty when the
  // user prepared in Z and announced only the basis.
  std::vector<std::optional<Bb84Symbol>> announced_aux_symbols;

  int num_users() const { return static_cast<int>(bsm.size()); }
  std::vector<int> aux_users() const;

  // Throws ValidationError describing the first inconsistency.
  void validate() const;
};

// Builds a consistent record (announcements derived from the preparations).
RoundRecord make_record(std::uint64_t round_id, std::vector<Bb84Symbol> preparations, std::vector<BsmOutcome> bsm,
                        std::vector<int> comm_users);

enum class DiscardReason { BsmFailure, BasisMismatch, AuxNotX };

std::string_view to_string(DiscardReason r);

struct SiftResult {
  bool kept = false;
  std::optional<int> flip_user;
  std::optional<std::array<int, 2>> bit_pair;
  std::optional<DiscardReason> discard_reason;
  // Populated for kept rounds.
  std::optional<Basis> basis;
  std::optional<PhiSign> equivalent;
};

struct ConferenceSiftResult {
  bool kept = false;
  std::optional<int> flip_user;
  std::optional<std::array<int, 3>> bits;
  std::optional<DiscardReason> discard_reason;
  std::optional<Basis> basis;
  std::optional<PhiSign> post_selected;
  std::optional<PhiSign> analyzer;
};

// Weighted single-qubit projector |state><state| * weight.
struct PovmElement {
  Bb84Symbol state;
  double weight;

  quantum::MeasurementOperator to_operator(int num_qubits, int target) const;
};

// 0 if the number of '-' is even, 1 if odd. Throws ParameterError on any
// character other than '+' or '-'.
int sigma_parity(std::string_view signs);
int sigma_parity(std::span<const Bb84Symbol> x_symbols);

// Combined parity of auxiliary X symbols, auxiliary BSM outcomes and the two
// communication-relay outcomes; 1 means X-basis bits come out anticorrelated.
int tau_parity(std::span<const Bb84Symbol> aux_symbols, std::span<const BsmOutcome> aux_bsm, BsmOutcome comm_first,
               BsmOutcome comm_second);

// Sign of the phi state left on the communication qubits once the auxiliary
// qubits are projected by their announced symbols and BSM results.
PhiSign post_selected_sign(std::span<const Bb84Symbol> aux_symbols, std::span<const BsmOutcome> aux_bsm);

PovmElement povm_equivalent(Bb84Symbol aux_symbol, BsmOutcome bsm);

PhiSign equivalent_bsm(PhiSign bell_a, BsmOutcome bsm1, BsmOutcome bsm2);

bool flip_decision(Basis basis, PhiSign equivalent);

SiftResult sift_round(const RoundRecord& record);

PhiSign ghz_analyzer_equivalent(PhiSign ghz_a, BsmOutcome bsm1, BsmOutcome bsm2, BsmOutcome bsm3);

ConferenceSiftResult conference_sift_round(const RoundRecord& record);

}  // namespace odmdi::protocol
