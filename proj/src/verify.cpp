#include "odmdi/verify.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "odmdi/errors.hpp"
#include "odmdi/netsim.hpp"
#include "odmdi/quantum.hpp"

namespace odmdi::verify {
namespace {

using quantum::Matrix;
using quantum::PureState;
using quantum::Vector;

constexpr std::array<BsmOutcome, 2> kOutcomes{BsmOutcome::PsiPlus, BsmOutcome::PsiMinus};
constexpr std::array<PhiSign, 2> kSigns{PhiSign::Plus, PhiSign::Minus};
constexpr std::array<Bb84Symbol, 4> kSymbols{Bb84Symbol::Zero, Bb84Symbol::One, Bb84Symbol::Plus, Bb84Symbol::Minus};
constexpr std::array<Bb84Symbol, 2> kXSymbols{Bb84Symbol::Plus, Bb84Symbol::Minus};

// Probability of projecting `state` onto psi^{outcomes[i]} on each pair.
double swap_probability(const PureState& state, const std::vector<std::pair<int, int>>& pairs,
                        const std::vector<BsmOutcome>& outcomes) {
  Vector v = state.amplitudes();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    v = quantum::apply(quantum::bell_projector(outcomes[i], pairs[i], state.num_qubits()), v);
  }
  return v.squaredNorm();
}

// phi^s on the first C qubits (GHZ side) and phi^r on the last C (user side);
// projecting every (k, k+C) pair onto psi leaves exactly one r with nonzero
// probability. That r is the sign the pairwise swaps transfer.
std::optional<PhiSign> swapped_sign(PhiSign s, const std::vector<BsmOutcome>& bsm, std::string& note) {
  const int c = static_cast<int>(bsm.size());
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < c; ++k) pairs.emplace_back(k, k + c);
  std::optional<PhiSign> found;
  for (PhiSign r : kSigns) {
    const PureState joint = quantum::tensor(quantum::phi_state(c, s), quantum::phi_state(c, r));
    if (swap_probability(joint, pairs, bsm) > quantum::kNullProbability) {
      if (found) {
        note = "both signs reachable";
        return std::nullopt;
      }
      found = r;
    }
  }
  if (!found) note = "no sign reachable";
  return found;
}

std::string join_outcomes(const std::vector<BsmOutcome>& bsm) {
  std::string s;
  for (std::size_t i = 0; i < bsm.size(); ++i) {
    if (i) s += ',';
    s += to_string(bsm[i]);
  }
  return s;
}

template <class F>
void guarded(TableCheck& check, const std::string& row, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    check.mismatches.push_back(row + ": rule threw: " + e.what());
  }
}

}  // namespace

bool VerifyReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed()) return false;
  }
  return true;
}

std::size_t VerifyReport::rows() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.rows;
  return n;
}

TableCheck check_povm_correspondence(const TableRules& rules) {
  TableCheck check{"povm-correspondence", 0, {}};
  for (Bb84Symbol a : kXSymbols) {
    for (BsmOutcome o : kOutcomes) {
      ++check.rows;
      const std::string row = std::string("ancilla=") + std::string(to_string(a)) + " bsm=" + std::string(to_string(o));
      guarded(check, row, [&] {
        // tr_ancilla[P_psi (I (x) |a><a|)] acting on the GHZ qubit.
        const Matrix ancilla = quantum::DensityOperator::from_pure(quantum::basis_state(a)).matrix();
        const Matrix lifted = quantum::embed(ancilla, std::array<int, 1>{1}, 2);
        const Matrix projector = quantum::bell_projector(o, {0, 1}, 2).dense();
        const Matrix expected = quantum::partial_trace(Matrix(projector * lifted), 2, std::array<int, 1>{0});
        const Matrix got = rules.povm(a, o).to_operator(1, 0).local();
        if ((expected - got).cwiseAbs().maxCoeff() > quantum::kNormTolerance) {
          check.mismatches.push_back(row + ": rule gives a different effect than the exact reduction");
        }
      });
    }
  }
  return check;
}

TableCheck check_equivalent_bsm(const TableRules& rules) {
  TableCheck check{"equivalent-bsm", 0, {}};
  for (PhiSign s : kSigns) {
    for (BsmOutcome b1 : kOutcomes) {
      for (BsmOutcome b2 : kOutcomes) {
        ++check.rows;
        const std::vector<BsmOutcome> bsm{b1, b2};
        const std::string row = std::string("bell_a=") + std::string(to_string(s)) + " bsm=" + join_outcomes(bsm);
        guarded(check, row, [&] {
          std::string note;
          const auto expected = swapped_sign(s, bsm, note);
          if (!expected) {
            check.mismatches.push_back(row + ": oracle inconclusive (" + note + ")");
            return;
          }
          const PhiSign got = rules.equivalent_bsm(s, b1, b2);
          if (got != *expected) {
            check.mismatches.push_back(row + ": expected " + std::string(to_string(*expected)) + ", rule gives " +
                                       std::string(to_string(got)));
          }
        });
      }
    }
  }
  return check;
}

TableCheck check_flip_table(const TableRules& rules) {
  TableCheck check{"flip-table", 0, {}};
  for (Basis b : {Basis::Z, Basis::X}) {
    ++check.rows;
    for (PhiSign s : kSigns) {
      const std::string row = std::string("basis=") + std::string(to_string(b)) + " equivalent=" +
                              std::string(to_string(s));
      guarded(check, row, [&] {
        // Preparations compatible with a shared phi^s: nonzero <phi^s|alpha beta>.
        // The flip is needed iff compatible pairs carry different bits.
        std::optional<bool> needs_flip;
        const PureState phi = quantum::phi_state(2, s);
        for (int ba = 0; ba < 2; ++ba) {
          for (int bb = 0; bb < 2; ++bb) {
            const PureState prep =
                quantum::tensor(quantum::basis_state(symbol_for(b, ba)), quantum::basis_state(symbol_for(b, bb)));
            if (std::norm(quantum::inner(phi, prep)) <= quantum::kNullProbability) continue;
            const bool differ = ba != bb;
            if (needs_flip && *needs_flip != differ) {
              check.mismatches.push_back(row + ": oracle found both equal and unequal compatible bits");
              return;
            }
            needs_flip = differ;
          }
        }
        if (!needs_flip) {
          check.mismatches.push_back(row + ": oracle found no compatible preparation");
          return;
        }
        const bool got = rules.flip(b, s);
        if (got != *needs_flip) {
          check.mismatches.push_back(row + ": expected " + (*needs_flip ? "flip" : "no flip") + ", rule gives " +
                                     (got ? "flip" : "no flip"));
        }
      });
    }
  }
  return check;
}

TableCheck check_ghz_analyzer(const TableRules& rules) {
  TableCheck check{"ghz-analyzer", 0, {}};
  for (PhiSign s : kSigns) {
    for (BsmOutcome b1 : kOutcomes) {
      for (BsmOutcome b2 : kOutcomes) {
        for (BsmOutcome b3 : kOutcomes) {
          ++check.rows;
          const std::vector<BsmOutcome> bsm{b1, b2, b3};
          const std::string row = std::string("ghz_a=") + std::string(to_string(s)) + " bsm=" + join_outcomes(bsm);
          guarded(check, row, [&] {
            std::string note;
            const auto expected = swapped_sign(s, bsm, note);
            if (!expected) {
              check.mismatches.push_back(row + ": oracle inconclusive (" + note + ")");
              return;
            }
            const PhiSign got = rules.ghz_analyzer(s, b1, b2, b3);
            if (got != *expected) {
              check.mismatches.push_back(row + ": expected " + std::string(to_string(*expected)) + ", rule gives " +
                                         std::string(to_string(got)));
            }
          });
        }
      }
    }
  }
  return check;
}

TableCheck check_sifting_n4(const TableRules& rules) {
  TableCheck check{"sifting-n4", 0, {}};
  constexpr int kUsers = 4;
  const std::vector<int> comm{0, 1};
  const PureState ghz = quantum::ghz_state(kUsers);
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < kUsers; ++k) pairs.emplace_back(k, k + kUsers);

  for (Bb84Symbol c0 : kSymbols) {
    for (Bb84Symbol c1 : kSymbols) {
      for (Bb84Symbol a2 : kXSymbols) {
        for (Bb84Symbol a3 : kXSymbols) {
          for (int mask = 0; mask < 16; ++mask) {
            ++check.rows;
            std::vector<BsmOutcome> bsm(kUsers);
            for (int k = 0; k < kUsers; ++k) bsm[static_cast<std::size_t>(k)] = kOutcomes[(mask >> k) & 1];
            const std::vector<Bb84Symbol> preps{c0, c1, a2, a3};
            std::ostringstream row;
            row << "prep=" << to_string(c0) << to_string(c1) << to_string(a2) << to_string(a3)
                << " bsm=" << join_outcomes(bsm);
            guarded(check, row.str(), [&] {
              PureState joint = ghz;
              for (Bb84Symbol p : preps) joint = quantum::tensor(joint, quantum::basis_state(p));
              const double prob = swap_probability(joint, pairs, bsm);
              const bool possible = prob > quantum::kNullProbability;

              const auto record = protocol::make_record(0, preps, bsm, comm);
              const auto sift = rules.sift(record);
              const bool matched = basis_of(c0) == basis_of(c1);
              if (!matched) {
                if (sift.kept || sift.discard_reason != protocol::DiscardReason::BasisMismatch) {
                  check.mismatches.push_back(row.str() + ": mismatched bases must be discarded");
                }
                return;
              }
              if (!sift.kept || !sift.bit_pair) {
                check.mismatches.push_back(row.str() + ": matched-basis round was not kept");
                return;
              }
              const bool equal = (*sift.bit_pair)[0] == (*sift.bit_pair)[1];
              if (possible && !equal) {
                check.mismatches.push_back(row.str() + ": reachable round gives unequal bits after the flip");
              } else if (!possible && equal) {
                check.mismatches.push_back(row.str() + ": unreachable round gives equal bits after the flip");
              }

              // The single parity formula and the two-step table path agree.
              const std::array<Bb84Symbol, 2> aux_symbols{a2, a3};
              const std::array<BsmOutcome, 2> aux_bsm{bsm[2], bsm[3]};
              const int tau = protocol::tau_parity(aux_symbols, aux_bsm, bsm[0], bsm[1]);
              const PhiSign chained =
                  rules.equivalent_bsm(protocol::post_selected_sign(aux_symbols, aux_bsm), bsm[0], bsm[1]);
              if (tau != parity_bit(chained)) {
                check.mismatches.push_back(row.str() + ": tau parity disagrees with the equivalent-BSM path");
              }
            });
          }
        }
      }
    }
  }
  return check;
}

VerifyReport verify_tables(const TableRules& rules) {
  VerifyReport report;
  report.checks.push_back(check_povm_correspondence(rules));
  report.checks.push_back(check_equivalent_bsm(rules));
  report.checks.push_back(check_flip_table(rules));
  report.checks.push_back(check_ghz_analyzer(rules));
  report.checks.push_back(check_sifting_n4(rules));
  return report;
}

TableCheck check_records(const std::vector<protocol::RoundRecord>& records, const TableRules& rules) {
  TableCheck check{"records", 0, {}};
  if (records.empty()) return check;
  const int n = records.front().num_users();
  const auto comm = records.front().comm_users;
  std::map<std::uint64_t, std::vector<Bb84Symbol>> mine;
  for (const auto& r : records) {
    if (r.num_users() != n || r.comm_users != comm) {
      check.mismatches.push_back("round " + std::to_string(r.round_id) + ": topology differs from the first record");
      return check;
    }
    auto& v = mine[r.round_id];
    for (int c : comm) v.push_back(*r.preparations[static_cast<std::size_t>(c)]);
  }
  if (comm.size() != 2) {
    check.rows = records.size();
    for (const auto& r : records) {
      guarded(check, "round " + std::to_string(r.round_id), [&] { protocol::conference_sift_round(r); });
    }
    return check;
  }
  const auto replayed = netsim::records_from_announcements(
      netsim::announce_phase(records), n, comm, [&](std::uint64_t id) { return mine.at(id); });
  if (replayed.size() != records.size()) {
    check.mismatches.push_back("announcement replay lost rounds");
    return check;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    ++check.rows;
    const std::string row = "round " + std::to_string(records[i].round_id);
    guarded(check, row, [&] {
      const auto full = rules.sift(records[i]);
      const auto pub = rules.sift(replayed[i]);
      if (full.kept != pub.kept || full.bit_pair != pub.bit_pair || full.discard_reason != pub.discard_reason) {
        check.mismatches.push_back(row + ": announcement-only sifting differs from full-information sifting");
      }
    });
  }
  return check;
}

void print_report(std::ostream& out, const VerifyReport& report) {
  for (const auto& c : report.checks) {
    out << c.name << ": " << c.rows << " rows checked, " << c.mismatches.size() << " mismatches: "
        << (c.passed() ? "PASS" : "FAIL") << '\n';
    for (const auto& m : c.mismatches) out << "  " << c.name << " mismatch: " << m << '\n';
  }
  out << "verify-tables: " << (report.passed() ? "PASS" : "FAIL") << " (" << report.rows() << " rows)\n";
}

}  // namespace odmdi::verify
