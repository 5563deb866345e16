#include "odmdi/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "odmdi/errors.hpp"

namespace odmdi::keyrate {
namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

double LinkBudget::transmittance() const {
  const double divisor = relay_at_midpoint ? 40.0 : 20.0;
  return std::pow(10.0, -alpha * distance_km / divisor);
}

double LinkBudget::arm_efficiency(double detector_efficiency) const { return detector_efficiency * transmittance(); }

void LinkBudget::validate() const {
  if (!(distance_km >= 0.0) || !std::isfinite(distance_km)) throw ParameterError("distance must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be >= 0");
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("binary entropy argument must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double coincidence_yield(double eta_a, double eta_b, double y0) {
  return (1.0 - (1.0 - y0) * (1.0 - eta_a)) * (1.0 - (1.0 - y0) * (1.0 - eta_b));
}

double error_rate(double p, double eta_a, double eta_b, double y0, double e_d) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("Werner weight must lie in [0, 1]");
  const double y11 = coincidence_yield(eta_a, eta_b, y0);
  if (y11 <= 0.0) throw UndefinedRateError("single-photon yield is zero; error rate undefined");
  return kRandomError - p * eta_a * eta_b * (kRandomError - e_d) / y11;
}

double yield_single_photon(const LinkBudget& link, const detector::EquivalentDetector& equiv) {
  const double eta = link.arm_efficiency(equiv.eta_z);
  return coincidence_yield(eta, eta, equiv.dark);
}

double yield_single_photon_x(const LinkBudget& link, const detector::EquivalentDetector& equiv) {
  const double eta = link.arm_efficiency(equiv.eta_x);
  return coincidence_yield(eta, eta, equiv.dark);
}

double phase_error_xx(double p, const LinkBudget& link, const detector::EquivalentDetector& equiv, double e_d) {
  const double eta = link.arm_efficiency(equiv.eta_x);
  return error_rate(p, eta, eta, equiv.dark, e_d);
}

double qber_zz(double p, const LinkBudget& link, const detector::EquivalentDetector& equiv, double e_d) {
  const double eta = link.arm_efficiency(equiv.eta_z);
  return error_rate(p, eta, eta, equiv.dark, e_d);
}

KeyRatePoint key_rate_realistic(double p, const LinkBudget& link, const detector::EquivalentDetector& equiv,
                                const detector::DetectorParams& params) {
  link.validate();
  KeyRatePoint point;
  point.distance_km = link.distance_km;
  point.p = p;
  point.gain_zz = yield_single_photon(link, equiv);
  if (point.gain_zz <= 0.0 || yield_single_photon_x(link, equiv) <= 0.0) {
    // Nothing is ever detected: no key, error rates default to random.
    point.qber_zz = kRandomError;
    point.phase_error_xx = kRandomError;
    point.clamped = true;
    return point;
  }
  point.qber_zz = qber_zz(p, link, equiv, params.e_d);
  point.phase_error_xx = phase_error_xx(p, link, equiv, params.e_d);
  // Single-photon sources: the overall gain equals the single-photon gain.
  const double q11 = point.gain_zz;
  point.raw_rate = q11 * (1.0 - binary_entropy(point.phase_error_xx)) -
                   q11 * params.f * binary_entropy(point.qber_zz);
  point.clamped = point.raw_rate <= 0.0;
  point.rate = point.clamped ? 0.0 : point.raw_rate;
  return point;
}

double key_rate_conference(double gain_z, double e_marginal_12, double e_marginal_13, double e_x, double f) {
  if (!(gain_z >= 0.0 && gain_z <= 1.0)) throw ParameterError("gain must lie in [0, 1]");
  const double worst = std::max(binary_entropy(e_marginal_12), binary_entropy(e_marginal_13));
  const double r = gain_z * (1.0 - f * worst - binary_entropy(e_x));
  return std::max(r, 0.0);
}

std::optional<double> cutoff_distance(double p, const detector::DetectorParams& params, bool relay_at_midpoint) {
  const auto equiv = detector::equivalent_detector(params);
  auto positive = [&](double d) {
    return key_rate_realistic(p, LinkBudget{d, params.alpha, relay_at_midpoint}, equiv, params).raw_rate > 0.0;
  };
  if (!positive(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 100.0;
  while (positive(hi)) {
    lo = hi;
    if (hi >= kCutoffSearchLimitKm) return std::nullopt;
    hi = std::min(2.0 * hi, kCutoffSearchLimitKm);
  }
  while (hi - lo > kCutoffResolutionKm) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return lo;
}

SweepReport sweep(const std::vector<double>& p_values, const std::vector<double>& distances_km,
                  const detector::DetectorParams& params, bool relay_at_midpoint) {
  if (p_values.empty() || distances_km.empty()) throw ParameterError("sweep grids must be nonempty");
  const auto equiv = detector::equivalent_detector(params);
  SweepReport report;
  report.points.reserve(p_values.size() * distances_km.size());
  for (double p : p_values) {
    for (double d : distances_km) {
      report.points.push_back(key_rate_realistic(p, LinkBudget{d, params.alpha, relay_at_midpoint}, equiv, params));
    }
    report.cutoffs.push_back({p, cutoff_distance(p, params, relay_at_midpoint)});
  }
  return report;
}

void write_csv(std::ostream& out, const SweepReport& report) {
  out << "#schema=1\n";
  out << "p,distance_km,gain_zz,qber_zz,phase_error_xx,rate\n";
  for (const auto& pt : report.points) {
    out << format_number(pt.p) << ',' << format_number(pt.distance_km) << ',' << format_number(pt.gain_zz) << ','
        << format_number(pt.qber_zz) << ',' << format_number(pt.phase_error_xx) << ',' << format_number(pt.rate)
        << '\n';
  }
}

std::string to_json(const SweepReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  auto points = nlohmann::ordered_json::array();
  for (const auto& pt : report.points) {
    nlohmann::ordered_json e;
    e["p"] = pt.p;
    e["distance_km"] = pt.distance_km;
    e["gain_zz"] = pt.gain_zz;
    e["qber_zz"] = pt.qber_zz;
    e["phase_error_xx"] = pt.phase_error_xx;
    e["rate"] = pt.rate;
    e["clamped"] = pt.clamped;
    points.push_back(std::move(e));
  }
  j["points"] = std::move(points);
  auto cutoffs = nlohmann::ordered_json::array();
  for (const auto& c : report.cutoffs) {
    nlohmann::ordered_json e;
    e["p"] = c.p;
    e["cutoff_km"] = c.cutoff_km ? nlohmann::ordered_json(*c.cutoff_km) : nlohmann::ordered_json();
    cutoffs.push_back(std::move(e));
  }
  j["cutoffs"] = std::move(cutoffs);
  return j.dump(2) + "\n";
}

}  // namespace odmdi::keyrate
