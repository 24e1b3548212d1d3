#include "qfconv/optics_chain.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qfconv/errors.hpp"

namespace qfconv {

PulseShape PulseShape::gaussian(double fwhm_ns, double center_ns) {
  if (!(fwhm_ns > 0.0) || !std::isfinite(fwhm_ns)) {
    throw ValidationError("pulse FWHM must be > 0 ns");
  }
  if (!std::isfinite(center_ns)) throw ValidationError("pulse center must be finite");
  return PulseShape{fwhm_ns, center_ns};
}

void WaveguideParams::validate() const {
  if (!(length_cm > 0.0)) throw ValidationError("waveguide length must be > 0 cm");
  if (!(normalized_efficiency > 0.0)) throw ValidationError("normalized efficiency must be > 0");
  require_fraction(max_external_efficiency, "max_external_efficiency");
}

void ElementTransmissions::validate() const {
  require_fraction(input_lens, "input_lens");
  require_fraction(coupling, "coupling");
  require_fraction(propagation, "propagation");
  require_fraction(output_lens, "output_lens");
}

double LossBudget::effective_waveguide_transmission() const {
  return std::sqrt(input.propagation * pump.propagation);
}

Wavelength dfg_output_wavelength(Wavelength input, Wavelength pump) {
  if (!(pump > input)) {
    throw ValidationError("pump wavelength must exceed the input wavelength for down-conversion");
  }
  // 1/lo = 1/li - 1/lp  =>  lo = li lp / (lp - li)
  return Wavelength::nanometers(input.nm() * pump.nm() / (pump.nm() - input.nm()));
}

double normalized_conversion(Power pump, const WaveguideParams& wg) {
  const double s = std::sin(wg.length_cm * std::sqrt(pump.watts() * wg.normalized_efficiency));
  return s * s;
}

double external_efficiency(Power pump, const WaveguideParams& wg) {
  wg.validate();
  return wg.max_external_efficiency * normalized_conversion(pump, wg);
}

Power optimal_pump_power(const WaveguideParams& wg) {
  wg.validate();
  constexpr double kQuarterTurn = std::numbers::pi / 2.0;
  return Power::watts(kQuarterTurn * kQuarterTurn /
                      (wg.length_cm * wg.length_cm * wg.normalized_efficiency));
}

EfficiencyCascade cascade(const LossBudget& budget, double internal_max, double filter_transmission,
                          double detection_efficiency) {
  budget.validate();
  require_fraction(internal_max, "internal_max");
  require_fraction(filter_transmission, "filter_transmission");
  require_fraction(detection_efficiency, "detection_efficiency");

  EfficiencyCascade c;
  c.coupling = budget.input.coupling;
  c.waveguide_transmission = budget.effective_waveguide_transmission();
  c.filter = filter_transmission;
  c.detection = detection_efficiency;
  c.internal_max = internal_max;
  c.external_max = c.coupling * c.internal_max;
  c.device_max = c.external_max * c.filter;
  c.total_max = c.device_max * c.detection;
  return c;
}

double combined_linewidth(double lorentzian_fwhm_mhz, double gaussian_fwhm_mhz) {
  if (!(lorentzian_fwhm_mhz >= 0.0) || !(gaussian_fwhm_mhz >= 0.0)) {
    throw ValidationError("linewidths must be >= 0");
  }
  const double fl = lorentzian_fwhm_mhz;
  return 0.5346 * fl + std::sqrt(0.2166 * fl * fl + gaussian_fwhm_mhz * gaussian_fwhm_mhz);
}

double pulse_bandwidth_mhz(const PulseShape& pulse) {
  if (!(pulse.fwhm_ns > 0.0)) throw ValidationError("pulse FWHM must be > 0 ns");
  // 0.44 / (fwhm * 1e-9 s) in Hz -> MHz
  return 0.44 / pulse.fwhm_ns * 1e3;
}

}  // namespace qfconv
