#include "qfconv/units.hpp"

#include <cmath>
#include <string>

#include "qfconv/errors.hpp"

namespace qfconv {

Wavelength Wavelength::nanometers(double nm) {
  if (!(nm > 0.0) || !std::isfinite(nm)) {
    throw ValidationError("wavelength must be finite and > 0 nm, got " + std::to_string(nm));
  }
  return Wavelength(nm);
}

Power Power::watts(double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw ValidationError("power must be finite and >= 0, got " + std::to_string(w) + " W");
  }
  return Power(w);
}

Power Power::milliwatts(double mw) { return watts(mw * 1e-3); }

double bandwidth_nm_to_ghz(double bandwidth_nm, Wavelength center) {
  return kSpeedOfLightNmGHz * bandwidth_nm / (center.nm() * center.nm());
}

double bandwidth_ghz_to_nm(double bandwidth_ghz, Wavelength center) {
  return bandwidth_ghz * center.nm() * center.nm() / kSpeedOfLightNmGHz;
}

void require_fraction(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

}  // namespace qfconv
