#include "qfconv/timebin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qfconv/errors.hpp"
#include "qfconv/rng.hpp"
#include "qfconv/units.hpp"

namespace qfconv {

namespace {

constexpr std::uint32_t kStreamFringe = 21;
constexpr double kBoundTailTolerance = 1e-12;

void check_grid(std::span<const double> gammas) {
  if (gammas.size() < 5) throw ValidationError("fringe grid needs at least 5 points");
  std::vector<double> g(gammas.begin(), gammas.end());
  std::sort(g.begin(), g.end());
  const double span = g.back() - g.front();
  const double spacing = span / static_cast<double>(g.size() - 1);
  const double period = 2.0 * std::numbers::pi;
  if (span + spacing < period * (1.0 - 1e-9)) throw ValidationError("fringe grid covers less than one period");
  if (!(spacing > 0.0) || period / spacing < 5.0 * (1.0 - 1e-9)) {
    throw ValidationError("fringe grid under-sampled: fewer than 5 points per period");
  }
}

}  // namespace

TimeBinQubit TimeBinQubit::make(double phase_rad, double early_weight, double late_weight, double separation_ns) {
  if (!(early_weight >= 0.0) || !(late_weight >= 0.0) || !(early_weight + late_weight > 0.0)) {
    throw ValidationError("time-bin weights must be >= 0 and not both zero");
  }
  const double norm = early_weight + late_weight;
  TimeBinQubit q{phase_rad, early_weight / norm, late_weight / norm, separation_ns};
  q.validate();
  return q;
}

void TimeBinQubit::validate() const {
  if (!(early_weight >= 0.0) || !(late_weight >= 0.0)) throw ValidationError("time-bin weights must be >= 0");
  if (std::abs(early_weight + late_weight - 1.0) > 1e-12) throw ValidationError("time-bin weights must sum to 1");
  if (!(separation_ns > 0.0)) throw ValidationError("time-bin separation must be > 0");
}

void Interferometer::validate() const {
  if (!(delay_ns > 0.0)) throw ValidationError("interferometer delay must be > 0");
  require_fraction(max_visibility, "max_visibility");
  require_fraction(splitter_ratio, "splitter_ratio");
}

SlotCounts port_slot_statistics(const TimeBinQubit& q, const Interferometer& ifm, double mu_input,
                                OutputPort port) {
  q.validate();
  ifm.validate();
  if (!(mu_input >= 0.0)) throw ValidationError("mean photon number must be >= 0");
  const double t = ifm.splitter_ratio;
  const double r = 1.0 - t;
  const double coherence = 2.0 * std::sqrt(q.early_weight * q.late_weight) * ifm.max_visibility *
                           std::cos(q.phase_rad - ifm.phase_rad);
  SlotCounts s;
  if (port == OutputPort::kCross) {
    // Both paths pick up one transmission and one reflection: amplitude i sqrt(TR).
    s.early = q.early_weight * t * r;
    s.late = q.late_weight * t * r;
    s.central = t * r * (1.0 + coherence);
  } else {
    // Short path T, long path -R e^{i gamma}.
    s.early = q.early_weight * t * t;
    s.late = q.late_weight * r * r;
    s.central = q.early_weight * r * r + q.late_weight * t * t - t * r * coherence;
  }
  s.early *= mu_input;
  s.central *= mu_input;
  s.late *= mu_input;
  return s;
}

SlotCounts slot_statistics(const TimeBinQubit& q, const Interferometer& ifm, double mu, double noise_per_slot) {
  if (std::abs(ifm.delay_ns - q.separation_ns) > 1e-9 * std::max(1.0, q.separation_ns)) {
    throw ValidationError("interferometer delay " + std::to_string(ifm.delay_ns) +
                          " ns does not match the time-bin separation " + std::to_string(q.separation_ns) + " ns");
  }
  if (!(noise_per_slot >= 0.0)) throw ValidationError("noise per slot must be >= 0");
  if (!(mu >= 0.0)) throw ValidationError("mean photon number must be >= 0");
  const double port_share = 2.0 * ifm.splitter_ratio * (1.0 - ifm.splitter_ratio);
  if (!(port_share > 0.0)) throw ValidationError("splitter ratio leaves no light in the monitored port");
  SlotCounts s = port_slot_statistics(q, ifm, mu / port_share, OutputPort::kCross);
  s.early += noise_per_slot;
  s.central += noise_per_slot;
  s.late += noise_per_slot;
  return s;
}

double visibility_model(double mu_in, double mu1, double v0) {
  if (!(mu_in >= 0.0)) throw ValidationError("mu_in must be >= 0");
  if (!(mu1 > 0.0)) throw ValidationError("mu1 must be > 0");
  if (std::isinf(mu_in)) return v0;
  return v0 * mu_in / (mu_in + 0.5 * mu1);
}

double central_slot_snr(double mu, double mu1) { return 2.0 * mu / mu1; }

double central_slot_noise(double mu1) { return 0.25 * mu1; }

FringeScan extract_visibility(Dataset counts) {
  static const std::function<double(double)> basis_fns[] = {
      [](double) { return 1.0; },
      [](double g) { return std::cos(g); },
      [](double g) { return std::sin(g); },
  };
  static const std::string names[] = {"offset", "cos", "sin"};
  FringeScan scan;
  scan.fit = fit_linear_basis(counts, basis_fns, names);
  const double a = scan.fit.params[0].value;
  const double b = scan.fit.params[1].value;
  const double c = scan.fit.params[2].value;
  const double amp = std::hypot(b, c);
  if (!(a > 0.0)) throw NumericalError("fringe offset is not positive");
  scan.visibility = amp / a;
  // Delta method on V = sqrt(b^2 + c^2) / a.
  double grad[3] = {-amp / (a * a), amp > 0 ? b / (amp * a) : 0.0, amp > 0 ? c / (amp * a) : 0.0};
  double var = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double cij = scan.fit.cov(i, j);
      if (std::isfinite(cij)) var += grad[i] * cij * grad[j];
    }
  }
  scan.visibility_sigma = std::sqrt(std::max(var, 0.0));
  scan.counts = std::move(counts);
  return scan;
}

FringeScan fringe_scan(const TimeBinQubit& q, const Interferometer& ifm, double mu, double noise_per_slot,
                       std::span<const double> gammas) {
  check_grid(gammas);
  Dataset counts("gamma_rad", "central_counts");
  Interferometer probe = ifm;
  for (double g : gammas) {
    probe.phase_rad = g;
    counts.add(g, slot_statistics(q, probe, mu, noise_per_slot).central);
  }
  return extract_visibility(std::move(counts));
}

FringeScan fringe_scan_counts(const TimeBinQubit& q, const Interferometer& ifm, double mu, double noise_per_slot,
                              std::span<const double> gammas, double detection_scale, double gates_per_point,
                              std::uint64_t seed) {
  check_grid(gammas);
  if (!(detection_scale > 0.0) || !(gates_per_point > 0.0)) {
    throw ValidationError("detection scale and gate count must be > 0");
  }
  Dataset counts("gamma_rad", "central_counts");
  Interferometer probe = ifm;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    probe.phase_rad = gammas[i];
    const double mean = gates_per_point * detection_scale * slot_statistics(q, probe, mu, noise_per_slot).central;
    SubstreamEngine engine(seed, kStreamFringe, i);
    const auto k = static_cast<double>(sample_poisson(engine, mean));
    counts.add(gammas[i], k, std::sqrt(std::max(k, 1.0)));
  }
  return extract_visibility(std::move(counts));
}

double fidelity_from_visibility(double visibility) {
  require_fraction(visibility, "visibility");
  return 0.5 * (1.0 + visibility);
}

double classical_fidelity_bound(double mu_in, double eta) {
  if (!(mu_in > 0.0) || !std::isfinite(mu_in)) throw ValidationError("mu_in must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");

  // Normalization: sum_{n>=1} P(n) (1 - (1-eta)^n) = 1 - exp(-mu eta).
  const double norm = -std::expm1(-mu_in * eta);
  const double log_mu = std::log(mu_in);
  const double log_miss = eta < 1.0 ? std::log1p(-eta) : -std::numeric_limits<double>::infinity();

  double acc = 0.0;
  for (std::uint64_t n = 1;; ++n) {
    const double dn = static_cast<double>(n);
    const double pmf = std::exp(dn * log_mu - mu_in - std::lgamma(dn + 1.0));
    const double detect = eta < 1.0 ? -std::expm1(dn * log_miss) : 1.0;
    acc += pmf * detect * (dn + 1.0) / (dn + 2.0);
    // Past the mode the Poisson tail beyond n is below P(n+1) / (1 - mu/(n+2)).
    if (dn + 2.0 > mu_in) {
      const double next = pmf * mu_in / (dn + 1.0);
      const double tail = next / (1.0 - mu_in / (dn + 2.0));
      if (tail <= kBoundTailTolerance * norm) break;
    }
  }
  return acc / norm;
}

std::vector<RegimeRow> quantum_regime_report(const Dataset& visibility_vs_mu, double eta_ext, double eta_dev) {
  std::vector<RegimeRow> rows;
  rows.reserve(visibility_vs_mu.size());
  for (const auto& p : visibility_vs_mu.points()) {
    RegimeRow row;
    row.mu_in = p.x;
    row.visibility = p.y;
    row.fidelity = fidelity_from_visibility(p.y);
    row.bound_eta1 = classical_fidelity_bound(p.x, 1.0);
    row.bound_ext = classical_fidelity_bound(p.x, eta_ext);
    row.bound_dev = classical_fidelity_bound(p.x, eta_dev);
    row.exceeds_eta1 = row.fidelity > row.bound_eta1;
    row.exceeds_ext = row.fidelity > row.bound_ext;
    row.exceeds_dev = row.fidelity > row.bound_dev;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qfconv
