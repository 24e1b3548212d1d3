#pragma once

#include "qfconv/units.hpp"

namespace qfconv {

/// Gaussian temporal intensity profile of the input pulse.
struct PulseShape {
  double fwhm_ns = 30.0;
  double center_ns = 0.0;

  static PulseShape gaussian(double fwhm_ns, double center_ns = 0.0);
  double sigma_ns() const noexcept { return fwhm_ns / kGaussianFwhmPerSigma; }
};

/// Nonlinear waveguide parameters entering the sin^2 conversion law.
struct WaveguideParams {
  double length_cm = 3.0;
  /// eta_n, fraction per (W cm^2).
  double normalized_efficiency = 0.72;
  /// Plateau of the external efficiency curve (eta_ext^M).
  double max_external_efficiency = 0.25;

  /// Throws ValidationError on L <= 0, eta_n <= 0 or eta_ext^M outside [0, 1].
  void validate() const;
  /// eta_n * L^2 in 1/W: the total normalized conversion efficiency.
  double total_normalized_efficiency() const noexcept {
    return normalized_efficiency * length_cm * length_cm;
  }
};

/// Transmission of each converter element at one wavelength.
struct ElementTransmissions {
  double input_lens = 1.0;
  double coupling = 1.0;
  double propagation = 1.0;
  double output_lens = 1.0;

  void validate() const;
  double total() const noexcept { return input_lens * coupling * propagation * output_lens; }
};

/// Per-element losses recorded at the input and pump wavelengths.
struct LossBudget {
  ElementTransmissions input;
  ElementTransmissions pump;

  void validate() const {
    input.validate();
    pump.validate();
  }
  /// Effective waveguide transmission for photons created mid-waveguide:
  /// half the propagation loss at each wavelength, sqrt(T_in * T_out).
  double effective_waveguide_transmission() const;
};

/// Individual efficiencies and their cumulative products.
struct EfficiencyCascade {
  double coupling = 0;              // eta_c
  double waveguide_transmission = 0;  // eta_t (upper bound on eta_int)
  double filter = 0;                // eta_f
  double detection = 0;             // eta_d, beta-inclusive

  double internal_max = 0;  // eta_int^M
  double external_max = 0;  // eta_ext^M = eta_c * eta_int^M
  double device_max = 0;    // eta_dev^M = eta_ext^M * eta_f
  double total_max = 0;     // eta_tot^M = eta_dev^M * eta_d
};

/// DFG energy conservation: 1/lambda_out = 1/lambda_in - 1/lambda_p.
/// Throws ValidationError when pump <= input (not a down-conversion).
Wavelength dfg_output_wavelength(Wavelength input, Wavelength pump);

/// eta_ext^M sin^2(L sqrt(P eta_n)).
double external_efficiency(Power pump, const WaveguideParams& wg);

/// The conversion curve normalized to 1 at its peak: sin^2(L sqrt(P eta_n)).
double normalized_conversion(Power pump, const WaveguideParams& wg);

/// Smallest pump power reaching the plateau: (pi/2)^2 / (L^2 eta_n).
Power optimal_pump_power(const WaveguideParams& wg);

/// Fills the cumulative columns from the input-wavelength coupling of `budget`.
EfficiencyCascade cascade(const LossBudget& budget, double internal_max, double filter_transmission,
                          double detection_efficiency);

/// Voigt FWHM (Olivero-Longbothum): 0.5346 f_L + sqrt(0.2166 f_L^2 + f_G^2).
double combined_linewidth(double lorentzian_fwhm_mhz, double gaussian_fwhm_mhz);

/// Transform-limited bandwidth of a Gaussian pulse, 0.44 / FWHM, in MHz.
double pulse_bandwidth_mhz(const PulseShape& pulse);

}  // namespace qfconv
