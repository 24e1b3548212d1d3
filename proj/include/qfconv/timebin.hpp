#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qfconv/fitting.hpp"

namespace qfconv {

/// |e> + e^{i phi} |l> with configurable early/late weights.
struct TimeBinQubit {
  double phase_rad = 0.0;
  double early_weight = 0.5;
  double late_weight = 0.5;
  double separation_ns = 100.0;

  /// Normalizes the weights; throws ValidationError on negative weights or separation <= 0.
  static TimeBinQubit make(double phase_rad, double early_weight = 0.5, double late_weight = 0.5,
                           double separation_ns = 100.0);
  void validate() const;
};

/// Unbalanced Mach-Zehnder analyzer built from two identical splitters.
struct Interferometer {
  double delay_ns = 100.0;
  double phase_rad = 0.0;  // gamma
  double max_visibility = 0.96;
  /// Power transmission of each splitter.
  double splitter_ratio = 0.5;

  void validate() const;
};

/// Counts (or probabilities) in the early, central and late slots.
struct SlotCounts {
  double early = 0;
  double central = 0;
  double late = 0;

  double total() const noexcept { return early + central + late; }
};

enum class OutputPort {
  kCross,  // constructive central slot at phi = gamma; the monitored port
  kBar,
};

/// Raw slot intensities at one output port for `mu_input` photons entering
/// the interferometer. Summed over both ports they equal `mu_input` for every
/// (phi, gamma).
SlotCounts port_slot_statistics(const TimeBinQubit& q, const Interferometer& ifm, double mu_input,
                                OutputPort port);

/// Monitored-port slot counts normalized so that `mu` is the gamma-averaged
/// photon number reaching the port: (mu/4, mu/2 (1 + V cos(phi - gamma)), mu/4)
/// for equal weights, plus `noise_per_slot` in every slot.
/// Throws ValidationError when the delay does not match the bin separation.
SlotCounts slot_statistics(const TimeBinQubit& q, const Interferometer& ifm, double mu, double noise_per_slot);

/// V = V0 mu / (mu + mu1 / 2).
double visibility_model(double mu_in, double mu1, double v0);

/// Central-slot SNR 2 mu / mu1 and the per-slot noise mu1 / 4 that produces it.
double central_slot_snr(double mu, double mu1);
double central_slot_noise(double mu1);

struct FringeScan {
  Dataset counts;  // central-slot counts vs gamma
  FitResult fit;   // a + b cos(gamma) + c sin(gamma)
  double visibility = 0;
  double visibility_sigma = 0;
};

/// Noiseless fringe: central-slot expectation at each gamma.
/// Throws ValidationError unless the grid spans a full period with >= 5 points.
FringeScan fringe_scan(const TimeBinQubit& q, const Interferometer& ifm, double mu, double noise_per_slot,
                       std::span<const double> gammas);

/// Counting-noise fringe: Poisson counts with mean
/// gates * detection_scale * (central + noise) at each gamma.
FringeScan fringe_scan_counts(const TimeBinQubit& q, const Interferometer& ifm, double mu, double noise_per_slot,
                              std::span<const double> gammas, double detection_scale, double gates_per_point,
                              std::uint64_t seed);

/// Visibility from a sinusoid fit of (gamma, counts): amplitude / offset.
FringeScan extract_visibility(Dataset counts);

/// F_c = (1 + V) / 2; throws ValidationError for V outside [0, 1].
double fidelity_from_visibility(double visibility);

/// Best measure-and-prepare fidelity for a Poissonian input of mean `mu_in`
/// seen through efficiency `eta`, conditioned on detection:
///   sum_{n>=1} w(n) (n+1)/(n+2),  w(n) ~ Poisson(n; mu) (1 - (1-eta)^n).
double classical_fidelity_bound(double mu_in, double eta);

struct RegimeRow {
  double mu_in = 0;
  double visibility = 0;
  double fidelity = 0;
  double bound_eta1 = 0;
  double bound_ext = 0;
  double bound_dev = 0;
  bool exceeds_eta1 = false;
  bool exceeds_ext = false;
  bool exceeds_dev = false;
};

/// Compares measured fidelities (from V vs mu data) against the classical
/// bound at eta = 1, eta_ext and eta_dev.
std::vector<RegimeRow> quantum_regime_report(const Dataset& visibility_vs_mu, double eta_ext, double eta_dev);

}  // namespace qfconv
