#include "odmdi/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "odmdi/errors.hpp"
#include "odmdi/quantum.hpp"

namespace odmdi::netsim {
namespace {

using quantum::DensityOperator;
using quantum::MeasurementOperator;
using quantum::Vector;

constexpr std::size_t kBatchRounds = 8192;

// Pair outcomes at a relay when both photons arrive.
enum PairOutcome : int { kPsiPlus = 0, kPsiMinus = 1, kBunchH = 2, kBunchV = 3 };

double survival(double alpha, double km) { return std::pow(10.0, -alpha * km / 10.0); }

// Everything about a topology that does not change between rounds.
struct SessionModel {
  Topology topology;
  DensityOperator source;
  std::vector<char> is_comm;
  std::vector<char> misaligned;
  std::vector<double> t_source;
  std::vector<double> t_user;
  // effects[k][symbol][outcome]: POVM on GHZ qubit k induced by projecting
  // (GHZ photon k, user photon k) onto a pair outcome, given the user symbol.
  std::vector<std::array<std::array<MeasurementOperator, 4>, 4>> effects;
  // z_projectors[k][bit]
  std::vector<std::array<MeasurementOperator, 2>> z_projectors;
};

std::array<MeasurementOperator, 4> pair_effects(Bb84Symbol user, int k, int n) {
  // <psi+-|_{q,u} (|q> (x) |a>) = (q0 a1 +- q1 a0)/sqrt2  =>  w = conj(a1, +-a0)/sqrt2.
  // <00| gives q0 a0, <11| gives q1 a1.
  const Vector a = quantum::basis_state(user).amplitudes();
  const double h = std::numbers::sqrt2 / 2.0;
  Vector plus(2), minus(2), bunch_h(2), bunch_v(2);
  plus << std::conj(a(1)) * h, std::conj(a(0)) * h;
  minus << std::conj(a(1)) * h, -std::conj(a(0)) * h;
  bunch_h << std::conj(a(0)), 0.0;
  bunch_v << 0.0, std::conj(a(1));
  return {quantum::qubit_effect(plus, k, n, "psi+"), quantum::qubit_effect(minus, k, n, "psi-"),
          quantum::qubit_effect(bunch_h, k, n, "HH"), quantum::qubit_effect(bunch_v, k, n, "VV")};
}

SessionModel build_model(const Topology& topology) {
  topology.validate();
  const int n = topology.num_users;
  SessionModel m{topology, quantum::werner_ghz(n, topology.source_p), {}, {}, {}, {}, {}, {}};
  m.is_comm.assign(static_cast<std::size_t>(n), 0);
  m.misaligned.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < topology.comm_users.size(); ++i) {
    const auto u = static_cast<std::size_t>(topology.comm_users[i]);
    m.is_comm[u] = 1;
    if (i > 0) m.misaligned[u] = 1;
  }
  const Vector zero = quantum::basis_state(Bb84Symbol::Zero).amplitudes();
  const Vector one = quantum::basis_state(Bb84Symbol::One).amplitudes();
  for (int k = 0; k < n; ++k) {
    const auto& arm = topology.arms[static_cast<std::size_t>(k)];
    m.t_source.push_back(survival(topology.params.alpha, arm.source_to_relay_km));
    m.t_user.push_back(survival(topology.params.alpha, arm.user_to_relay_km));
    m.effects.push_back({pair_effects(Bb84Symbol::Zero, k, n), pair_effects(Bb84Symbol::One, k, n),
                         pair_effects(Bb84Symbol::Plus, k, n), pair_effects(Bb84Symbol::Minus, k, n)});
    m.z_projectors.push_back({quantum::qubit_effect(zero, k, n, "H"), quantum::qubit_effect(one, k, n, "V")});
  }
  return m;
}

int pick(const double* probs, int count, double u) {
  double acc = 0.0;
  for (int i = 0; i < count - 1; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return count - 1;
}

protocol::RoundRecord simulate(const SessionModel& m, std::uint64_t seed, std::uint64_t round_id, double basis_bias) {
  const Topology& topo = m.topology;
  const auto n = static_cast<std::size_t>(topo.num_users);
  CounterRng rng(seed, round_id);

  std::vector<Bb84Symbol> preps(n);
  for (std::size_t u = 0; u < n; ++u) {
    Basis basis = Basis::X;
    if (m.is_comm[u]) {
      basis = rng.bernoulli(basis_bias) ? Basis::Z : Basis::X;
    } else if (topo.aux_uniform_bases) {
      basis = rng.bernoulli(0.5) ? Basis::Z : Basis::X;
    }
    preps[u] = symbol_for(basis, static_cast<int>(rng() & 1u));
  }

  DensityOperator rho = m.source;
  std::vector<BsmOutcome> bsm(n, BsmOutcome::Failure);
  for (std::size_t k = 0; k < n; ++k) {
    const bool source_arrives = rng.bernoulli(m.t_source[k]);
    const bool user_arrives = rng.bernoulli(m.t_user[k]);
    const std::array<int, 1> qubit{static_cast<int>(k)};
    if (m.misaligned[k] && rng.bernoulli(topo.params.e_d)) {
      rho = quantum::apply_unitary(rho, quantum::pauli_y(), qubit);
    }

    std::array<int, 4> photons{};
    const int port = static_cast<int>(rng() & 1u);
    if (source_arrives && user_arrives) {
      const auto& effects = m.effects[k][static_cast<std::size_t>(preps[k])];
      const quantum::Matrix reduced = quantum::partial_trace(rho.matrix(), topo.num_users, qubit);
      double probs[4];
      for (int o = 0; o < 4; ++o) probs[o] = std::max(0.0, (effects[o].local() * reduced).trace().real());
      const int outcome = pick(probs, 4, rng.uniform());
      auto measured = quantum::measure(rho, effects[static_cast<std::size_t>(outcome)]);
      if (measured.post_state) rho = std::move(*measured.post_state);
      switch (outcome) {
        case kPsiPlus:
          ++photons[port ? D2H : D1H];
          ++photons[port ? D2V : D1V];
          break;
        case kPsiMinus:
          ++photons[port ? D1V : D1H];
          ++photons[port ? D2H : D2V];
          break;
        case kBunchH: photons[port ? D2H : D1H] += 2; break;
        case kBunchV: photons[port ? D2V : D1V] += 2; break;
      }
    } else if (source_arrives) {
      // Lone GHZ photon: the PBS reads out its polarization.
      const quantum::Matrix reduced = quantum::partial_trace(rho.matrix(), topo.num_users, qubit);
      const double probs[2] = {std::max(0.0, reduced(0, 0).real()), std::max(0.0, reduced(1, 1).real())};
      const int pol = pick(probs, 2, rng.uniform());
      auto measured = quantum::measure(rho, m.z_projectors[k][static_cast<std::size_t>(pol)]);
      if (measured.post_state) rho = std::move(*measured.post_state);
      ++photons[(port ? D2H : D1H) + pol];
    } else if (user_arrives) {
      const Vector a = quantum::basis_state(preps[k]).amplitudes();
      const int pol = rng.bernoulli(std::norm(a(0))) ? 0 : 1;
      ++photons[(port ? D2H : D1H) + pol];
    }
    bsm[k] = classify_clicks(sample_clicks(photons, topo.params, rng));
  }
  return protocol::make_record(round_id, std::move(preps), std::move(bsm), topo.comm_users);
}

std::string pairing_key(const protocol::RoundRecord& r) {
  std::string key;
  for (auto b : r.announced_bases) key += to_string(b);
  return key;
}

nlohmann::ordered_json estimate_json(const Estimate& e) {
  nlohmann::ordered_json j;
  const auto v = e.value();
  const auto s = e.std_error();
  j["value"] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
  j["std_error"] = s ? nlohmann::ordered_json(*s) : nlohmann::ordered_json();
  j["hits"] = e.hits;
  j["trials"] = e.trials;
  return j;
}

void accumulate(SessionStats& st, const protocol::RoundRecord& r, bool kept, std::optional<protocol::DiscardReason> why,
                bool error, std::array<bool, 2> marginal_errors) {
  ++st.rounds;
  if (kept) {
    ++st.kept;
  } else if (why) {
    switch (*why) {
      case protocol::DiscardReason::BsmFailure: ++st.discard_bsm_failure; break;
      case protocol::DiscardReason::BasisMismatch: ++st.discard_basis_mismatch; break;
      case protocol::DiscardReason::AuxNotX: ++st.discard_aux_not_x; break;
    }
  }

  const std::string key = pairing_key(r);
  auto& ps = st.pairings[key];
  ++ps.rounds;
  const auto aux = r.aux_users();
  bool heralded = true;
  for (std::size_t i = 0; i < aux.size(); ++i) {
    if (!r.announced_aux_symbols[i] || !is_success(r.bsm[static_cast<std::size_t>(aux[i])])) heralded = false;
  }
  bool coincidence = heralded;
  for (int c : r.comm_users) {
    if (!is_success(r.bsm[static_cast<std::size_t>(c)])) coincidence = false;
  }
  if (heralded) ++ps.heralded;
  if (coincidence) ++ps.coincidences;
  if (kept && error) ++ps.errors;

  const bool all_z = key.find('X') == std::string::npos;
  const bool all_x = key.find('Z') == std::string::npos;
  if (all_z) {
    ++st.raw_gain_z.trials;
    if (heralded) ++st.gain_z.trials;
    if (coincidence) {
      ++st.gain_z.hits;
      ++st.raw_gain_z.hits;
    }
  }
  if (kept) {
    Estimate& q = all_z ? st.qber_z : st.qber_x;
    ++q.trials;
    if (error) ++q.hits;
    if (all_z && r.comm_users.size() == 3) {
      ++st.qber_z_12.trials;
      ++st.qber_z_13.trials;
      if (marginal_errors[0]) ++st.qber_z_12.hits;
      if (marginal_errors[1]) ++st.qber_z_13.hits;
    }
  }
  (void)all_x;
}

void accumulate_record(SessionStats& st, const protocol::RoundRecord& r) {
  if (r.comm_users.size() == 2) {
    const auto s = protocol::sift_round(r);
    const bool error = s.kept && (*s.bit_pair)[0] != (*s.bit_pair)[1];
    accumulate(st, r, s.kept, s.discard_reason, error, {false, false});
    return;
  }
  const auto s = protocol::conference_sift_round(r);
  bool error = false;
  std::array<bool, 2> marginal{false, false};
  if (s.kept) {
    const auto& b = *s.bits;
    if (*s.basis == Basis::Z) {
      marginal = {b[0] != b[1], b[0] != b[2]};
      error = marginal[0] || marginal[1];
    } else {
      error = ((b[0] ^ b[1] ^ b[2]) & 1) != 0;
    }
  }
  accumulate(st, r, s.kept, s.discard_reason, error, marginal);
}

}  // namespace

void Topology::validate() const {
  if (num_users > quantum::kMaxRegisterQubits) {
    throw CapacityError("the exact-state backend supports at most " + std::to_string(quantum::kMaxRegisterQubits) +
                        " users; got " + std::to_string(num_users));
  }
  if (num_users < 2) throw ValidationError("a network needs at least two users");
  if (comm_users.size() < 2 || comm_users.size() > 3) throw ValidationError("2 or 3 communication users required");
  for (std::size_t i = 0; i < comm_users.size(); ++i) {
    if (comm_users[i] < 0 || comm_users[i] >= num_users) throw ValidationError("communication user out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (comm_users[i] == comm_users[j]) throw ValidationError("communication users must be distinct");
    }
  }
  if (arms.size() != static_cast<std::size_t>(num_users)) throw ValidationError("one arm entry per user required");
  for (const auto& a : arms) {
    if (!(a.source_to_relay_km >= 0.0) || !(a.user_to_relay_km >= 0.0)) {
      throw ValidationError("arm lengths must be >= 0");
    }
  }
  if (!(source_p >= 0.0 && source_p <= 1.0)) throw ValidationError("source weight must lie in [0, 1]");
  try {
    params.validate();
  } catch (const ParameterError& e) {
    throw ValidationError(e.what());
  }
}

Topology Topology::star(int num_users, std::vector<int> comm_users, double comm_distance_km, double aux_arm_km,
                        const detector::DetectorParams& params, double source_p, bool relay_at_midpoint) {
  Topology t;
  t.num_users = num_users;
  t.comm_users = std::move(comm_users);
  t.params = params;
  t.source_p = source_p;
  t.arms.assign(static_cast<std::size_t>(std::max(num_users, 0)), ArmLengths{aux_arm_km, 0.0});
  for (int c : t.comm_users) {
    if (c < 0 || c >= num_users) continue;  // reported by validate()
    auto& arm = t.arms[static_cast<std::size_t>(c)];
    arm = relay_at_midpoint ? ArmLengths{comm_distance_km / 4.0, comm_distance_km / 4.0}
                            : ArmLengths{comm_distance_km / 2.0, 0.0};
  }
  return t;
}

void SessionConfig::validate() const {
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  if (!(basis_bias >= 0.0 && basis_bias <= 1.0)) throw ValidationError("basis_bias must lie in [0, 1]");
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

BsmOutcome classify_clicks(unsigned mask) {
  const unsigned d1h = 1u << D1H, d1v = 1u << D1V, d2h = 1u << D2H, d2v = 1u << D2V;
  if (mask == (d1h | d1v) || mask == (d2h | d2v)) return BsmOutcome::PsiPlus;
  if (mask == (d1h | d2v) || mask == (d1v | d2h)) return BsmOutcome::PsiMinus;
  return BsmOutcome::Failure;
}

unsigned sample_clicks(const std::array<int, 4>& photons, const detector::DetectorParams& params, CounterRng& rng) {
  unsigned mask = 0;
  for (int d = 0; d < 4; ++d) {
    const double silent = (1.0 - params.p_d) * std::pow(1.0 - params.eta_d, photons[static_cast<std::size_t>(d)]);
    if (rng.uniform() >= silent) mask |= 1u << d;
  }
  return mask;
}

std::optional<double> Estimate::value() const {
  if (trials == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(trials);
}

std::optional<double> Estimate::std_error() const {
  const auto v = value();
  if (!v) return std::nullopt;
  return std::sqrt(*v * (1.0 - *v) / static_cast<double>(trials));
}

bool SessionStats::operator==(const SessionStats& o) const { return to_json(*this) == to_json(o); }

protocol::RoundRecord simulate_round(const Topology& topology, std::uint64_t seed, std::uint64_t round_id,
                                     double basis_bias) {
  return simulate(build_model(topology), seed, round_id, basis_bias);
}

SessionStats run_session(const Topology& topology, const SessionConfig& config, const RecordSink& sink) {
  config.validate();
  const SessionModel model = build_model(topology);
  StatsAccumulator acc;
  std::vector<protocol::RoundRecord> batch;
  for (std::uint64_t start = 0; start < config.rounds; start += kBatchRounds) {
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(kBatchRounds, config.rounds - start));
    batch.assign(count, {});
    const unsigned workers = std::min<unsigned>(config.workers, static_cast<unsigned>(count));
    auto work = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) batch[i] = simulate(model, config.seed, start + i, config.basis_bias);
    };
    if (workers <= 1) {
      work(0, count);
    } else {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (count + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
      }
    }
    for (const auto& r : batch) {
      acc.add(r);
      if (sink) sink(r);
    }
  }
  return acc.stats();
}

void StatsAccumulator::add(const protocol::RoundRecord& record) { accumulate_record(stats_, record); }

SessionStats estimate_statistics(const std::vector<protocol::RoundRecord>& records,
                                 const std::vector<protocol::SiftResult>& sift_results) {
  if (records.size() != sift_results.size()) throw ValidationError("records and sift results are not aligned");
  SessionStats st;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& s = sift_results[i];
    if (r.comm_users.size() != 2) throw ValidationError("two-party sift results supplied for a conference record");
    const bool error = s.kept && s.bit_pair && (*s.bit_pair)[0] != (*s.bit_pair)[1];
    accumulate(st, r, s.kept, s.discard_reason, error, {false, false});
  }
  return st;
}

std::string to_json(const SessionStats& st) {
  nlohmann::ordered_json j;
  j["rounds"] = st.rounds;
  j["kept"] = st.kept;
  j["discarded"] = {{"bsm_failure", st.discard_bsm_failure},
                    {"basis_mismatch", st.discard_basis_mismatch},
                    {"aux_not_x", st.discard_aux_not_x}};
  nlohmann::ordered_json pairings = nlohmann::ordered_json::object();
  for (const auto& [key, ps] : st.pairings) {
    pairings[key] = {{"rounds", ps.rounds},
                     {"heralded", ps.heralded},
                     {"coincidences", ps.coincidences},
                     {"errors", ps.errors}};
  }
  j["pairings"] = std::move(pairings);
  j["gain_z"] = estimate_json(st.gain_z);
  j["raw_gain_z"] = estimate_json(st.raw_gain_z);
  j["qber_z"] = estimate_json(st.qber_z);
  j["qber_x"] = estimate_json(st.qber_x);
  if (st.qber_z_12.trials > 0 || st.qber_z_13.trials > 0) {
    j["qber_z_12"] = estimate_json(st.qber_z_12);
    j["qber_z_13"] = estimate_json(st.qber_z_13);
  }
  return j.dump(2) + "\n";
}

std::vector<Announcement> announce_phase(const std::vector<protocol::RoundRecord>& records) {
  std::vector<Announcement> log;
  for (const auto& r : records) {
    for (int k = 0; k < r.num_users(); ++k) {
      log.push_back({r.round_id, k, AnnouncementKind::Bsm, std::string(to_string(r.bsm[static_cast<std::size_t>(k)]))});
    }
    if (!std::all_of(r.bsm.begin(), r.bsm.end(), is_success)) continue;
    std::vector<std::pair<int, Basis>> bases;
    for (std::size_t i = 0; i < r.comm_users.size(); ++i) bases.emplace_back(r.comm_users[i], r.announced_bases[i]);
    std::sort(bases.begin(), bases.end());
    for (const auto& [node, b] : bases) log.push_back({r.round_id, node, AnnouncementKind::Basis, std::string(to_string(b))});
    const auto aux = r.aux_users();
    for (std::size_t i = 0; i < aux.size(); ++i) {
      const auto& s = r.announced_aux_symbols[i];
      log.push_back({r.round_id, aux[i], AnnouncementKind::AuxSymbol, s ? std::string(to_string(*s)) : "Z"});
    }
  }
  return log;
}

std::vector<protocol::RoundRecord> records_from_announcements(const std::vector<Announcement>& log, int num_users,
                                                              const std::vector<int>& comm_users,
                                                              const PrivateLookup& comm_private) {
  std::vector<protocol::RoundRecord> out;
  std::size_t i = 0;
  while (i < log.size()) {
    const std::uint64_t round = log[i].round_id;
    protocol::RoundRecord r;
    r.round_id = round;
    r.comm_users = comm_users;
    r.bsm.assign(static_cast<std::size_t>(num_users), BsmOutcome::Failure);
    r.preparations.assign(static_cast<std::size_t>(num_users), std::nullopt);
    std::map<int, std::optional<Bb84Symbol>> aux_announced;
    for (; i < log.size() && log[i].round_id == round; ++i) {
      const auto& a = log[i];
      if (a.node_id < 0 || a.node_id >= num_users) throw ValidationError("announcement from unknown node");
      switch (a.kind) {
        case AnnouncementKind::Bsm: {
          const auto o = parse_outcome(a.value);
          if (!o) throw ValidationError("bad BSM announcement '" + a.value + "'");
          r.bsm[static_cast<std::size_t>(a.node_id)] = *o;
          break;
        }
        case AnnouncementKind::Basis: break;  // cross-checked against private data by validate()
        case AnnouncementKind::AuxSymbol:
          aux_announced[a.node_id] = a.value == "Z" ? std::nullopt : parse_symbol(a.value);
          break;
      }
    }
    const auto mine = comm_private(round);
    if (mine.size() != comm_users.size()) throw ValidationError("private lookup returned the wrong number of symbols");
    for (std::size_t c = 0; c < comm_users.size(); ++c) {
      r.preparations[static_cast<std::size_t>(comm_users[c])] = mine[c];
      r.announced_bases.push_back(basis_of(mine[c]));
    }
    for (int u : r.aux_users()) {
      const auto it = aux_announced.find(u);
      r.announced_aux_symbols.push_back(it == aux_announced.end() ? std::nullopt : it->second);
    }
    r.validate();
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Comparison> compare_with_analytic(const SessionStats& stats, const Topology& topology) {
  topology.validate();
  if (topology.comm_users.size() != 2) throw ValidationError("analytic comparison covers the two-party mode only");
  const auto equiv = detector::equivalent_detector(topology.params);
  const double alpha = topology.params.alpha;
  auto arm_t = [&](int u) {
    const auto& arm = topology.arms[static_cast<std::size_t>(u)];
    return survival(alpha, arm.source_to_relay_km) * survival(alpha, arm.user_to_relay_km);
  };
  const double ta = arm_t(topology.comm_users[0]);
  const double tb = arm_t(topology.comm_users[1]);
  const double p = topology.source_p;
  const double e_d = topology.params.e_d;

  const double gain = keyrate::coincidence_yield(equiv.eta_z * ta, equiv.eta_z * tb, equiv.dark);
  const double ezz = keyrate::error_rate(p, equiv.eta_z * ta, equiv.eta_z * tb, equiv.dark, e_d);
  const double exx = keyrate::error_rate(p, equiv.eta_x * ta, equiv.eta_x * tb, equiv.dark, e_d);

  auto compare = [](std::string name, double analytic, const Estimate& e) {
    Comparison c{std::move(name), analytic, e.value(), e.trials, std::nullopt, std::nullopt};
    if (e.trials > 0) {
      const double sigma = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(e.trials));
      c.sigma = sigma;
      if (sigma > 0.0) c.z_score = (*c.empirical - analytic) / sigma;
    }
    return c;
  };
  return {compare("gain_zz", gain, stats.gain_z), compare("qber_zz", ezz, stats.qber_z),
          compare("phase_error_xx", exx, stats.qber_x)};
}

}  // namespace odmdi::netsim
