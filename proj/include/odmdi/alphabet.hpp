#pragma once

#include <optional>
#include <string_view>

namespace odmdi {

// Polarization alphabet. H -> |0>, V -> |1>, D -> |+>, A -> |->.
enum class Bb84Symbol { Zero, One, Plus, Minus };

enum class Basis { Z, X };

// Linear-optics relay result; only the two psi states are distinguishable.
enum class BsmOutcome { PsiPlus, PsiMinus, Failure };

// Sign of a post-selected phi state, used for both the two-party Bell states
// (|00> +- |11>)/sqrt2 and the three-party GHZ states (|000> +- |111>)/sqrt2.
enum class PhiSign { Plus, Minus };

constexpr Basis basis_of(Bb84Symbol s) {
  return (s == Bb84Symbol::Zero || s == Bb84Symbol::One) ? Basis::Z : Basis::X;
}

// Z: Zero->0, One->1. X: Plus->0, Minus->1.
constexpr int key_bit(Bb84Symbol s) {
  return (s == Bb84Symbol::One || s == Bb84Symbol::Minus) ? 1 : 0;
}

constexpr Bb84Symbol symbol_for(Basis b, int bit) {
  if (b == Basis::Z) return bit ? Bb84Symbol::One : Bb84Symbol::Zero;
  return bit ? Bb84Symbol::Minus : Bb84Symbol::Plus;
}

constexpr bool is_success(BsmOutcome o) { return o != BsmOutcome::Failure; }

constexpr int parity_bit(BsmOutcome o) { return o == BsmOutcome::PsiMinus ? 1 : 0; }

constexpr int parity_bit(PhiSign s) { return s == PhiSign::Minus ? 1 : 0; }

constexpr PhiSign sign_from_parity(int bit) { return (bit & 1) ? PhiSign::Minus : PhiSign::Plus; }

// Wire spellings: "H","V","D","A"; "Z","X"; "psi+","psi-","fail"; "phi+","phi-".
std::string_view to_string(Bb84Symbol s);
std::string_view to_string(Basis b);
std::string_view to_string(BsmOutcome o);
std::string_view to_string(PhiSign s);

std::optional<Bb84Symbol> parse_symbol(std::string_view text);
std::optional<Basis> parse_basis(std::string_view text);
std::optional<BsmOutcome> parse_outcome(std::string_view text);

}  // namespace odmdi
