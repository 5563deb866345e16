#pragma once

// Equivalent-detector algebra for a polarization BSM built from a 50:50 beam
// splitter, two PBSs and four threshold detectors (D1H, D1V, D2H, D2V).
// Treating "BSM + local BB84 photon" as one virtual detector gives a
// basis-dependent efficiency and an effective dark count.

namespace odmdi::detector {

struct DetectorParams {
  double eta_d = 0.40;   // detection efficiency
  double p_d = 8e-8;     // dark count probability per detector per gate
  double e_d = 0.02;     // misalignment error probability
  double f = 1.16;       // error-correction inefficiency
  double alpha = 0.2;    // fiber loss, dB/km

  // Throws ParameterError if a field is out of range.
  void validate() const;
  bool operator==(const DetectorParams&) const = default;
};

struct EquivalentDetector {
  double eta_z = 0.0;
  double eta_x = 0.0;
  double dark = 0.0;
  bool operator==(const EquivalentDetector&) const = default;
};

// Success probability when both inputs carry the same polarization (HH).
// The photons bunch, so success needs a dark click in a partner detector.
double prob_bsm_same_pol(const DetectorParams& params);

// Success probability for orthogonal inputs (HV).
double prob_bsm_diff_pol(const DetectorParams& params);

// Local photon present, incoming photon absent.
double prob_bsm_vacuum(const DetectorParams& params);

double equivalent_eff_z(const DetectorParams& params);
double equivalent_eff_x(const DetectorParams& params);
double equivalent_dark(const DetectorParams& params);

EquivalentDetector equivalent_detector(const DetectorParams& params);

// Rounds to `digits` significant figures; used for report output.
double round_significant(double value, int digits);

}  // namespace odmdi::detector
