#pragma once

// Exhaustive cross-check of the protocol's lookup rules against exact state
// projections computed with quantum-core.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "odmdi/protocol.hpp"

namespace odmdi::verify {

// The rules under test. Defaults are the shipped protocol functions; tests
// swap single entries to check that the verifier catches the fault.
struct TableRules {
  std::function<protocol::PovmElement(Bb84Symbol, BsmOutcome)> povm = protocol::povm_equivalent;
  std::function<PhiSign(PhiSign, BsmOutcome, BsmOutcome)> equivalent_bsm = protocol::equivalent_bsm;
  std::function<bool(Basis, PhiSign)> flip = protocol::flip_decision;
  std::function<PhiSign(PhiSign, BsmOutcome, BsmOutcome, BsmOutcome)> ghz_analyzer = protocol::ghz_analyzer_equivalent;
  std::function<protocol::SiftResult(const protocol::RoundRecord&)> sift = protocol::sift_round;
};

struct TableCheck {
  std::string name;
  std::size_t rows = 0;
  std::vector<std::string> mismatches;  // one line per failing row

  bool passed() const { return mismatches.empty(); }
};

struct VerifyReport {
  std::vector<TableCheck> checks;

  bool passed() const;
  std::size_t rows() const;
};

// Checks, in order:
//   povm-correspondence  4 rows  single-qubit effect of (X ancilla, BSM result)
//   equivalent-bsm       8 rows  swapped Bell sign for (bell_a, bsm1, bsm2)
//   flip-table           2 rows  one per basis, both phi signs
//   ghz-analyzer        16 rows  swapped 3-party GHZ sign
//   sifting-n4        1024 rows  N=4 end to end, plus tau consistency
TableCheck check_povm_correspondence(const TableRules& rules = {});
TableCheck check_equivalent_bsm(const TableRules& rules = {});
TableCheck check_flip_table(const TableRules& rules = {});
TableCheck check_ghz_analyzer(const TableRules& rules = {});
TableCheck check_sifting_n4(const TableRules& rules = {});

VerifyReport verify_tables(const TableRules& rules = {});

// Re-sifts recorded rounds and checks that sifting from the public
// announcement log alone gives the same result as full-information sifting.
TableCheck check_records(const std::vector<protocol::RoundRecord>& records, const TableRules& rules = {});

void print_report(std::ostream& out, const VerifyReport& report);

}  // namespace odmdi::verify
