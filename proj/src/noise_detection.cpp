#include "qfconv/noise_detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qfconv/errors.hpp"

namespace qfconv {

void FilterStage::validate() const {
  require_fraction(fiber_coupling, "fiber_coupling");
  require_fraction(grating, "grating");
  require_fraction(bandpass_longpass, "bandpass_longpass");
  if (!(bandwidth_nm > 0.0)) throw ValidationError("filter bandwidth must be > 0 nm");
  if (!allow_extrapolation && (bandwidth_nm < kMinBandwidthNm || bandwidth_nm > kMaxBandwidthNm)) {
    throw ValidationError("filter bandwidth " + std::to_string(bandwidth_nm) +
                          " nm outside the device range [0.65, 2.3] nm (set allow_extrapolation)");
  }
}

void DetectorConfig::validate() const {
  require_fraction(efficiency, "detector efficiency");
  if (!(gate_width_ns > 0.0)) throw ValidationError("gate_width must be > 0 ns");
  if (!(dark_rate_per_ns >= 0.0)) throw ValidationError("dark_rate must be >= 0");
  if (!(dead_time_us >= 0.0)) throw ValidationError("dead_time must be >= 0");
  if (!allow_nonstandard_gate &&
      std::find(kAllowedGatesNs.begin(), kAllowedGatesNs.end(), gate_width_ns) == kAllowedGatesNs.end()) {
    throw ValidationError("gate_width " + std::to_string(gate_width_ns) +
                          " ns is not one of {20, 50, 100} ns (set allow_nonstandard_gate)");
  }
}

void NoiseModel::validate() const {
  if (!(alpha_per_mw >= 0.0)) throw ValidationError("alpha must be >= 0");
  if (!(alpha_crystal_per_mw_ns >= 0.0)) throw ValidationError("alpha_crystal must be >= 0");
  if (!(reference_gate_ns > 0.0)) throw ValidationError("reference_gate must be > 0 ns");
  if (!(reference_bandwidth_nm > 0.0)) throw ValidationError("reference_bandwidth must be > 0 nm");
}

ConversionChain ConversionChain::reference() {
  ConversionChain c;
  c.losses.input = {0.99, 0.61, 0.61, 0.80};
  c.losses.pump = {0.66, 0.58, 0.78, 0.98};
  c.pulse = PulseShape::gaussian(30.0);
  return c;
}

void ConversionChain::validate() const {
  (void)output_wavelength();
  losses.validate();
  require_fraction(internal_efficiency_max, "internal_efficiency_max");
  waveguide().validate();
  filter.validate();
  detector.validate();
  noise.validate();
  if (!(pulse.fwhm_ns > 0.0)) throw ValidationError("pulse FWHM must be > 0 ns");
}

WaveguideParams ConversionChain::waveguide() const {
  return WaveguideParams{waveguide_length_cm, normalized_efficiency,
                         losses.input.coupling * internal_efficiency_max};
}

double ConversionChain::beta() const { return beta_factor(pulse, detector); }

EfficiencyCascade ConversionChain::efficiencies() const {
  return cascade(losses, internal_efficiency_max, filter.transmission(), detector.efficiency * beta());
}

double ConversionChain::filter_bandwidth_ghz() const {
  return bandwidth_nm_to_ghz(filter.bandwidth_nm, output_wavelength());
}

double noise_counts(Power pump, const NoiseModel& model, const DetectorConfig& det, double bandwidth_nm) {
  model.validate();
  if (!(bandwidth_nm > 0.0)) throw ValidationError("bandwidth must be > 0 nm");
  return model.detected_rate_per_ns(pump, bandwidth_nm) * det.gate_width_ns + det.dark_counts();
}

double beta_factor(const PulseShape& pulse, double gate_ns, double offset_ns) {
  if (!(gate_ns >= 0.0)) throw ValidationError("gate width must be >= 0");
  if (std::isinf(gate_ns)) return 1.0;
  const double scale = pulse.sigma_ns() * std::numbers::sqrt2;
  const double half = 0.5 * gate_ns;
  return 0.5 * (std::erf((half - offset_ns) / scale) + std::erf((half + offset_ns) / scale));
}

RateBreakdown detection_probabilities(double mu_in, Power pump, const ConversionChain& chain) {
  if (!(mu_in >= 0.0)) throw ValidationError("mu_in must be >= 0");
  const EfficiencyCascade eff = chain.efficiencies();
  const double signal = mu_in * eff.total_max * normalized_conversion(pump, chain.waveguide());
  const double dark = chain.detector.dark_counts();
  const double noise = noise_counts(pump, chain.noise, chain.detector, chain.filter.bandwidth_nm);

  RateBreakdown r;
  r.dark_counts = dark;
  r.noise_counts = noise;
  r.signal_counts = signal + noise;
  r.p_dark = -std::expm1(-dark);
  r.p_noise = -std::expm1(-noise);
  r.p_signal = -std::expm1(-(signal + noise));
  r.beta = chain.beta();
  return r;
}

double snr(const RateBreakdown& rates, DarkSubtraction mode) {
  if (mode == DarkSubtraction::kSubtract) {
    const double denom = rates.noise_counts - rates.dark_counts;
    if (!(denom > 0.0)) throw DegenerateDenominator("SNR undefined: N - DC <= 0");
    return (rates.signal_counts - rates.noise_counts) / denom;
  }
  if (!(rates.p_noise > 0.0)) throw DegenerateDenominator("SNR_DC undefined: p_N = 0");
  return (rates.p_signal - rates.p_noise) / rates.p_noise;
}

double mu1(const ConversionChain& chain, Power pump) {
  if (!(pump.watts() > 0.0)) throw ValidationError("mu1 requires P_p > 0");
  const double excess_noise =
      noise_counts(pump, chain.noise, chain.detector, chain.filter.bandwidth_nm) - chain.detector.dark_counts();
  if (!(excess_noise > 0.0)) throw DegenerateDenominator("mu1 undefined: no pump noise above dark counts");
  const double per_photon = chain.efficiencies().total_max * normalized_conversion(pump, chain.waveguide());
  if (!(per_photon > 0.0)) throw NumericalError("mu1 undefined: zero conversion at this pump power");
  return excess_noise / per_photon;
}

NoiseFloorProjection projected_noise_floor(double target_bandwidth_ghz, const ConversionChain& chain) {
  return projected_noise_floor(target_bandwidth_ghz, chain, optimal_pump_power(chain.waveguide()),
                               chain.detector.gate_width_ns);
}

NoiseFloorProjection projected_noise_floor(double target_bandwidth_ghz, const ConversionChain& chain,
                                           Power pump, double gate_ns) {
  if (!(target_bandwidth_ghz > 0.0)) throw ValidationError("target bandwidth must be > 0");
  if (!(gate_ns > 0.0)) throw ValidationError("gate width must be > 0 ns");
  const Wavelength out = chain.output_wavelength();
  const double reference_ghz = bandwidth_nm_to_ghz(chain.noise.reference_bandwidth_nm, out);
  const double min_ghz = bandwidth_nm_to_ghz(FilterStage::kMinBandwidthNm, out);

  NoiseFloorProjection p;
  p.alpha_crystal_per_mw_ns = chain.noise.alpha_crystal_per_mw_ns * target_bandwidth_ghz / reference_ghz;
  p.photons_per_pulse = p.alpha_crystal_per_mw_ns * pump.milliwatts() * gate_ns;
  p.extrapolated = target_bandwidth_ghz < min_ghz;
  return p;
}

double backpropagated_alpha_crystal(const NoiseModel& model, const DetectorConfig& det) {
  if (!(det.efficiency > 0.0)) throw DegenerateDenominator("detector efficiency is zero");
  return model.alpha_per_mw / (model.reference_gate_ns * det.efficiency);
}

}  // namespace qfconv
