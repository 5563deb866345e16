#include "odmdi/records.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "odmdi/errors.hpp"

namespace odmdi::records {
namespace {

using nlohmann::ordered_json;

template <typename T, typename Parse>
T parse_enum(const ordered_json& j, Parse parse, const char* what) {
  if (!j.is_string()) throw ValidationError(std::string(what) + " must be a string");
  const auto v = parse(j.get<std::string>());
  if (!v) throw ValidationError(std::string("unknown ") + what + " '" + j.get<std::string>() + "'");
  return *v;
}

const ordered_json& field(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

std::string to_json_line(const protocol::RoundRecord& r) {
  ordered_json j;
  j["round"] = r.round_id;
  j["users"] = r.num_users();
  j["comm"] = r.comm_users;
  auto prep = ordered_json::array();
  for (const auto& p : r.preparations) prep.push_back(p ? ordered_json(std::string(to_string(*p))) : ordered_json());
  j["prep"] = std::move(prep);
  auto bsm = ordered_json::array();
  for (auto o : r.bsm) bsm.push_back(std::string(to_string(o)));
  j["bsm"] = std::move(bsm);
  auto bases = ordered_json::array();
  for (auto b : r.announced_bases) bases.push_back(std::string(to_string(b)));
  j["bases"] = std::move(bases);
  auto aux = ordered_json::array();
  for (const auto& a : r.announced_aux_symbols) aux.push_back(a ? ordered_json(std::string(to_string(*a))) : ordered_json());
  j["aux"] = std::move(aux);
  return j.dump();
}

protocol::RoundRecord from_json_line(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("record is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("record must be a JSON object");

  protocol::RoundRecord r;
  try {
    r.round_id = field(j, "round").get<std::uint64_t>();
    const int users = field(j, "users").get<int>();
    r.comm_users = field(j, "comm").get<std::vector<int>>();
    for (const auto& p : field(j, "prep")) {
      r.preparations.push_back(p.is_null() ? std::nullopt
                                           : std::optional<Bb84Symbol>(parse_enum<Bb84Symbol>(p, parse_symbol, "symbol")));
    }
    for (const auto& o : field(j, "bsm")) r.bsm.push_back(parse_enum<BsmOutcome>(o, parse_outcome, "BSM outcome"));
    for (const auto& b : field(j, "bases")) r.announced_bases.push_back(parse_enum<Basis>(b, parse_basis, "basis"));
    for (const auto& a : field(j, "aux")) {
      r.announced_aux_symbols.push_back(
          a.is_null() ? std::nullopt : std::optional<Bb84Symbol>(parse_enum<Bb84Symbol>(a, parse_symbol, "symbol")));
    }
    if (users != r.num_users()) throw ValidationError("'users' does not match the number of BSM entries");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("record field has the wrong type: ") + e.what());
  }
  r.validate();
  return r;
}

void write_records(std::ostream& out, const std::vector<protocol::RoundRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<protocol::RoundRecord> read_records(std::istream& in) {
  std::vector<protocol::RoundRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace odmdi::records
