#pragma once

// Line-delimited JSON encoding of RoundRecord, one object per line:
//
//   {"round":7,"users":4,"comm":[0,1],"prep":["H","D","D","A"],
//    "bsm":["psi+","psi-","psi+","fail"],"bases":["Z","X"],"aux":["D","A"]}
//
// "prep" entries may be null (private data not known to the reader); "aux"
// entries are null when the auxiliary user prepared in Z and announced only
// its basis. Keys are always written in the order shown.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "odmdi/protocol.hpp"

namespace odmdi::records {

std::string to_json_line(const protocol::RoundRecord& record);

// Throws ValidationError on malformed or inconsistent input.
protocol::RoundRecord from_json_line(std::string_view line);

void write_records(std::ostream& out, const std::vector<protocol::RoundRecord>& records);

// Skips blank lines; errors carry the 1-based line number.
std::vector<protocol::RoundRecord> read_records(std::istream& in);

}  // namespace odmdi::records
