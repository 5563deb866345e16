#pragma once

// Seeded round-level simulator of the star network.
//
// Per round: every user picks a BB84 symbol, the source emits a Werner-mixed
// GHZ state, each photon survives its fiber arm independently, and relay k
// runs a linear-optics BSM on GHZ photon k and user photon k. The BSM is
// modeled photon by photon: the pair is projected onto {psi+, psi-, HH, VV}
// with exact Born probabilities, the photons are routed to the four threshold
// detectors (D1H, D1V, D2H, D2V) and each detector fires with efficiency eta_d
// per photon plus dark count p_d. Two-click patterns {D1H,D1V}/{D2H,D2V} are
// psi+, {D1H,D2V}/{D1V,D2H} are psi-, everything else fails.
//
// Misalignment: the GHZ photon of every communication user except the first
// passes a sigma_y error with probability e_d, which flips both Z and X
// correlations and so gives kept signal coincidences an error rate e_d in
// either basis.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odmdi/detector.hpp"
#include "odmdi/keyrate.hpp"
#include "odmdi/protocol.hpp"
#include "odmdi/rng.hpp"

namespace odmdi::netsim {

struct ArmLengths {
  double source_to_relay_km = 0.0;
  double user_to_relay_km = 0.0;
};

struct Topology {
  int num_users = 4;
  std::vector<int> comm_users{0, 1};
  std::vector<ArmLengths> arms;  // one per user
  detector::DetectorParams params;
  double source_p = 1.0;
  // Auxiliary users prepare uniformly over all four symbols instead of X only.
  bool aux_uniform_bases = false;

  // Throws CapacityError for N > 8, ValidationError for other violations.
  void validate() const;

  // Both communication arms get half of `comm_distance_km` between source and
  // relay (or a quarter on each side of a midpoint relay); auxiliary arms get
  // `aux_arm_km` from the source.
  static Topology star(int num_users, std::vector<int> comm_users, double comm_distance_km, double aux_arm_km,
                       const detector::DetectorParams& params, double source_p, bool relay_at_midpoint = false);
};

struct SessionConfig {
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 1;
  double basis_bias = 0.5;  // probability a communication user picks Z
  unsigned workers = 1;

  void validate() const;
};

// Click detectors, in the order used by click masks.
enum Detector : int { D1H = 0, D1V = 1, D2H = 2, D2V = 3 };

// Bit i of the mask set means detector i fired.
BsmOutcome classify_clicks(unsigned mask);

// Fires each detector given its photon count.
unsigned sample_clicks(const std::array<int, 4>& photons, const detector::DetectorParams& params, CounterRng& rng);

// Binomial estimate p = hits / trials with sqrt(p(1-p)/n).
struct Estimate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  std::optional<double> value() const;
  std::optional<double> std_error() const;
};

struct PairingStats {
  std::uint64_t rounds = 0;
  // Auxiliary relays all succeeded and every auxiliary user announced X.
  std::uint64_t heralded = 0;
  // Heralded rounds in which every communication relay also succeeded.
  std::uint64_t coincidences = 0;
  // Coincidences whose sifted bits disagree (matched pairings only).
  std::uint64_t errors = 0;
};

struct SessionStats {
  std::uint64_t rounds = 0;
  std::uint64_t kept = 0;
  std::uint64_t discard_bsm_failure = 0;
  std::uint64_t discard_basis_mismatch = 0;
  std::uint64_t discard_aux_not_x = 0;
  // Keyed by the communication users' bases in listed order, e.g. "ZX".
  std::map<std::string, PairingStats> pairings;

  // Conditional gain: coincidences / heralded rounds with all-Z bases.
  Estimate gain_z;
  Estimate raw_gain_z;  // coincidences / all rounds with all-Z bases
  Estimate qber_z;
  Estimate qber_x;
  // Conference mode only: pairwise Z disagreement of users (1,2) and (1,3).
  Estimate qber_z_12;
  Estimate qber_z_13;

  bool operator==(const SessionStats&) const;
};

using RecordSink = std::function<void(const protocol::RoundRecord&)>;

// Simulates one round; depends only on (topology, seed, round_id).
protocol::RoundRecord simulate_round(const Topology& topology, std::uint64_t seed, std::uint64_t round_id,
                                     double basis_bias = 0.5);

// Runs `config.rounds` rounds, emitting records to `sink` in round_id order
// regardless of worker count, and returns the aggregated statistics.
SessionStats run_session(const Topology& topology, const SessionConfig& config, const RecordSink& sink = {});

// Accumulates statistics one round at a time.
class StatsAccumulator {
 public:
  void add(const protocol::RoundRecord& record);
  const SessionStats& stats() const { return stats_; }

 private:
  SessionStats stats_;
};

// Aligned inputs; sift_results must come from sift_round on the same records.
SessionStats estimate_statistics(const std::vector<protocol::RoundRecord>& records,
                                 const std::vector<protocol::SiftResult>& sift_results);

std::string to_json(const SessionStats& stats);

// Public broadcast after the relays measure, ordered by (round_id, node_id) within each kind.
enum class AnnouncementKind { Bsm, Basis, AuxSymbol };

struct Announcement {
  std::uint64_t round_id = 0;
  int node_id = 0;
  AnnouncementKind kind = AnnouncementKind::Bsm;
  std::string value;  // "psi+"/"psi-"/"fail", "Z"/"X", "D"/"A"/"Z"
  bool operator==(const Announcement&) const = default;
};

// Per round: every relay announces; if all succeed, the communication users
// announce bases and each auxiliary user announces its X symbol (or "Z").
std::vector<Announcement> announce_phase(const std::vector<protocol::RoundRecord>& records);

// Rebuilds records from the public log plus the communication users' own
// preparations (looked up by round id). Auxiliary preparations stay unknown.
using PrivateLookup = std::function<std::vector<Bb84Symbol>(std::uint64_t round_id)>;
std::vector<protocol::RoundRecord> records_from_announcements(const std::vector<Announcement>& log, int num_users,
                                                              const std::vector<int>& comm_users,
                                                              const PrivateLookup& comm_private);

// Analytic-vs-Monte-Carlo comparison in units of the binomial standard error
// of the analytic value, sqrt(a(1-a)/n).
struct Comparison {
  std::string quantity;
  double analytic = 0.0;
  std::optional<double> empirical;
  std::uint64_t samples = 0;
  std::optional<double> sigma;
  std::optional<double> z_score;
};

// Two-party topologies only. Uses each communication arm's actual survival
// probability as the link transmittance.
std::vector<Comparison> compare_with_analytic(const SessionStats& stats, const Topology& topology);

}  // namespace odmdi::netsim
