#pragma once

#include <array>

#include "qfconv/optics_chain.hpp"
#include "qfconv/units.hpp"

namespace qfconv {

/// Grating + fiber filtering stage after the waveguide.
struct FilterStage {
  double bandwidth_nm = 0.68;
  double fiber_coupling = 0.5;
  double grating = 0.7;
  double bandpass_longpass = 0.74;
  /// Permit bandwidths outside the tunable range of the physical device.
  bool allow_extrapolation = false;

  static constexpr double kMinBandwidthNm = 0.65;
  static constexpr double kMaxBandwidthNm = 2.3;

  void validate() const;
  double transmission() const noexcept { return fiber_coupling * grating * bandpass_longpass; }
};

/// Gated single-photon detector.
struct DetectorConfig {
  double gate_width_ns = 20.0;
  /// Detector efficiency times fiber connection, without the gate fraction.
  double efficiency = 0.07;
  double dark_rate_per_ns = 1e-5;
  double dead_time_us = 20.0;
  bool allow_nonstandard_gate = false;

  static constexpr std::array<double, 3> kAllowedGatesNs{20.0, 50.0, 100.0};

  void validate() const;
  /// Expected dark counts in one gate.
  double dark_counts() const noexcept { return dark_rate_per_ns * gate_width_ns; }
};

/// Pump-induced noise: linear in pump power, gate width and filter bandwidth.
///
/// `alpha_per_mw` is the detected noise per gate per mW measured with
/// `reference_gate_ns` and `reference_bandwidth_nm`; internally it is carried
/// as a density per (mW ns nm) so both widths rescale the same constant.
/// `alpha_crystal_per_mw_ns` is the same floor referred back to the crystal
/// output, at the reference bandwidth.
struct NoiseModel {
  double alpha_per_mw = 6e-6;
  double reference_gate_ns = 20.0;
  double reference_bandwidth_nm = 0.68;
  double alpha_crystal_per_mw_ns = 5e-6;

  void validate() const;
  /// Detected noise counts per (mW ns nm).
  double detected_density() const noexcept {
    return alpha_per_mw / (reference_gate_ns * reference_bandwidth_nm);
  }
  /// Detected pump-noise rate in counts/ns at the given pump and bandwidth.
  double detected_rate_per_ns(Power pump, double bandwidth_nm) const noexcept {
    return detected_density() * pump.milliwatts() * bandwidth_nm;
  }
};

/// The full converter description: optics, filter, detector and noise.
struct ConversionChain {
  Wavelength input_wavelength = Wavelength::nanometers(780.24);
  Wavelength pump_wavelength = Wavelength::nanometers(1569.4);
  double waveguide_length_cm = 3.0;
  double normalized_efficiency = 0.72;
  double internal_efficiency_max = 0.41;
  LossBudget losses;
  FilterStage filter;
  DetectorConfig detector;
  NoiseModel noise;
  PulseShape pulse;

  /// Reference apparatus: measured losses, 20 ns gate, 0.68 nm filter.
  static ConversionChain reference();

  void validate() const;
  Wavelength output_wavelength() const { return dfg_output_wavelength(input_wavelength, pump_wavelength); }
  /// Waveguide parameters with eta_ext^M = eta_c * eta_int^M.
  WaveguideParams waveguide() const;
  /// Detected fraction of the pulse inside the configured gate.
  double beta() const;
  /// Cascade with eta_d = detector efficiency * beta.
  EfficiencyCascade efficiencies() const;
  /// Filter bandwidth expressed in GHz at the output wavelength.
  double filter_bandwidth_ghz() const;
};

/// Per-gate detection statistics.
struct RateBreakdown {
  double p_signal = 0;  // p_S: click probability with input on
  double p_noise = 0;   // p_N: input blocked
  double p_dark = 0;    // dark-only click probability
  double signal_counts = 0;  // S: expected counts, input on
  double noise_counts = 0;   // N: expected counts, input blocked
  double dark_counts = 0;    // DC
  double beta = 0;
};

enum class DarkSubtraction { kSubtract, kKeep };

/// N(P) = alpha P + DC with alpha projected to the detector gate and filter bandwidth.
double noise_counts(Power pump, const NoiseModel& model, const DetectorConfig& det, double bandwidth_nm);

/// Fraction of a Gaussian pulse falling inside a gate of width `gate_ns`
/// whose center is offset from the pulse center by `offset_ns`.
double beta_factor(const PulseShape& pulse, double gate_ns, double offset_ns = 0.0);
inline double beta_factor(const PulseShape& pulse, const DetectorConfig& det, double offset_ns = 0.0) {
  return beta_factor(pulse, det.gate_width_ns, offset_ns);
}

/// Poisson-thinned click probabilities: p = 1 - exp(-lambda).
RateBreakdown detection_probabilities(double mu_in, Power pump, const ConversionChain& chain);

/// (S - N)/(N - DC) when subtracting dark counts, else (p_S - p_N)/p_N.
double snr(const RateBreakdown& rates, DarkSubtraction mode);

/// Input photon number giving a dark-subtracted SNR of 1.
double mu1(const ConversionChain& chain, Power pump);

struct NoiseFloorProjection {
  double alpha_crystal_per_mw_ns = 0;
  double photons_per_pulse = 0;
  /// Target bandwidth lies below the measured filter range.
  bool extrapolated = false;
};

/// Linear rescaling of the crystal-referred noise floor to a new filter bandwidth.
/// The per-pulse figure uses the optimal pump power and the chain's gate.
NoiseFloorProjection projected_noise_floor(double target_bandwidth_ghz, const ConversionChain& chain);
NoiseFloorProjection projected_noise_floor(double target_bandwidth_ghz, const ConversionChain& chain,
                                           Power pump, double gate_ns);

/// alpha back-propagated to the crystal through the detector efficiency, per mW per ns.
double backpropagated_alpha_crystal(const NoiseModel& model, const DetectorConfig& det);

}  // namespace qfconv
