#include "odmdi/detector.hpp"

#include <cmath>
#include <string>

#include "odmdi/errors.hpp"

namespace odmdi::detector {
namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

// Probability that a detector fed one photon fires (photon detected or dark).
double single_fire(const DetectorParams& p) { return 1.0 - (1.0 - p.p_d) * (1.0 - p.eta_d); }

// Same with two photons on one detector.
double double_fire(const DetectorParams& p) {
  return 1.0 - (1.0 - p.p_d) * (1.0 - p.eta_d) * (1.0 - p.eta_d);
}

}  // namespace

void DetectorParams::validate() const {
  if (!in_unit(eta_d)) throw ParameterError("eta_d must lie in [0, 1]");
  if (!in_unit(p_d)) throw ParameterError("p_d must lie in [0, 1]");
  if (!in_unit(e_d)) throw ParameterError("e_d must lie in [0, 1]");
  if (!(f >= 1.0) || !std::isfinite(f)) throw ParameterError("f must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be >= 0");
}

double prob_bsm_same_pol(const DetectorParams& p) {
  const double quiet = (1.0 - p.p_d) * (1.0 - p.p_d);
  return 2.0 * p.p_d * quiet * double_fire(p);
}

double prob_bsm_diff_pol(const DetectorParams& p) {
  const double quiet = (1.0 - p.p_d) * (1.0 - p.p_d);
  const double fire = single_fire(p);
  return quiet * fire * fire;
}

double prob_bsm_vacuum(const DetectorParams& p) { return 2.0 * p.p_d * (1.0 - p.p_d) * (1.0 - p.p_d) * p.eta_d; }

double equivalent_eff_z(const DetectorParams& p) {
  const double quiet = (1.0 - p.p_d) * (1.0 - p.p_d);
  const double fire = single_fire(p);
  return 0.5 * quiet * (2.0 * p.p_d * double_fire(p) + fire * fire);
}

double equivalent_eff_x(const DetectorParams& p) { return prob_bsm_diff_pol(p); }

double equivalent_dark(const DetectorParams& p) { return prob_bsm_vacuum(p); }

EquivalentDetector equivalent_detector(const DetectorParams& params) {
  params.validate();
  return {equivalent_eff_z(params), equivalent_eff_x(params), equivalent_dark(params)};
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const double magnitude = std::floor(std::log10(std::abs(value)));
  const double scale = std::pow(10.0, digits - 1 - magnitude);
  return std::round(value * scale) / scale;
}

}  // namespace odmdi::detector
