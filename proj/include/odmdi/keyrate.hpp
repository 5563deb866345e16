#pragma once

// Analytic key-rate chain for the two-party mode (single-photon sources,
// asymptotic limit) and the three-party conference rate.
//
// Distance is the total fiber length between the two communication users.
// With relays at the user side each arm transmits 10^(-alpha L / 20); moving
// the relays to the midpoint halves the exponent again.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "odmdi/detector.hpp"

namespace odmdi::keyrate {

struct LinkBudget {
  double distance_km = 0.0;
  double alpha = 0.2;
  bool relay_at_midpoint = false;

  // Per-arm channel transmittance.
  double transmittance() const;
  // transmittance() times a detector efficiency.
  double arm_efficiency(double detector_efficiency) const;
  void validate() const;
};

struct KeyRatePoint {
  double distance_km = 0.0;
  double p = 1.0;
  double gain_zz = 0.0;
  double qber_zz = 0.0;
  double phase_error_xx = 0.0;
  double rate = 0.0;
  // Unclamped value; rate = max(raw_rate, 0).
  double raw_rate = 0.0;
  bool clamped = false;
};

struct CutoffEntry {
  double p = 1.0;
  // Largest distance with positive rate, resolved to 0.1 km. Empty if the rate
  // is positive across the whole search range.
  std::optional<double> cutoff_km;
};

struct SweepReport {
  std::vector<KeyRatePoint> points;  // ordered by p (input order), then distance
  std::vector<CutoffEntry> cutoffs;
};

inline constexpr double kRandomError = 0.5;
inline constexpr double kCutoffResolutionKm = 0.1;
inline constexpr double kCutoffSearchLimitKm = 10000.0;

// H(x) = -x log2 x - (1-x) log2(1-x); throws ParameterError outside [0, 1].
double binary_entropy(double x);

// Coincidence yield for arm efficiencies eta_a, eta_b and background count y0.
double coincidence_yield(double eta_a, double eta_b, double y0);

// Error rate e0 - p eta_a eta_b (e0 - e_d) / Y11. Throws UndefinedRateError if Y11 == 0.
double error_rate(double p, double eta_a, double eta_b, double y0, double e_d);

// Y11 with Z-basis equivalent efficiencies.
double yield_single_photon(const LinkBudget& link, const detector::EquivalentDetector& equiv);
double yield_single_photon_x(const LinkBudget& link, const detector::EquivalentDetector& equiv);

double phase_error_xx(double p, const LinkBudget& link, const detector::EquivalentDetector& equiv, double e_d);
double qber_zz(double p, const LinkBudget& link, const detector::EquivalentDetector& equiv, double e_d);

KeyRatePoint key_rate_realistic(double p, const LinkBudget& link, const detector::EquivalentDetector& equiv,
                                const detector::DetectorParams& params);

// R3 = Q^Z {1 - f max[H(E12), H(E13)] - H(E^X)}, clamped at zero.
double key_rate_conference(double gain_z, double e_marginal_12, double e_marginal_13, double e_x, double f);

// Distance at which the rate reaches zero, bisected to kCutoffResolutionKm.
std::optional<double> cutoff_distance(double p, const detector::DetectorParams& params, bool relay_at_midpoint = false);

// Throws ParameterError on empty grids.
SweepReport sweep(const std::vector<double>& p_values, const std::vector<double>& distances_km,
                  const detector::DetectorParams& params, bool relay_at_midpoint = false);

// "#schema=1" line, then p,distance_km,gain_zz,qber_zz,phase_error_xx,rate.
void write_csv(std::ostream& out, const SweepReport& report);
std::string to_json(const SweepReport& report);

}  // namespace odmdi::keyrate
