#pragma once

#include <compare>

namespace qfconv {

/// Vacuum speed of light in nm·GHz (c = 299792458 m/s).
inline constexpr double kSpeedOfLightNmGHz = 299792458.0;

/// FWHM / sigma for a Gaussian.
inline constexpr double kGaussianFwhmPerSigma = 2.3548200450309493;

/// Vacuum wavelength in nanometers. Always strictly positive.
class Wavelength {
 public:
  static Wavelength nanometers(double nm);

  constexpr double nm() const noexcept { return nm_; }
  /// Optical frequency in GHz.
  double frequency_ghz() const noexcept { return kSpeedOfLightNmGHz / nm_; }

  friend constexpr auto operator<=>(Wavelength, Wavelength) = default;

 private:
  constexpr explicit Wavelength(double nm) : nm_(nm) {}
  double nm_;
};

/// Optical power. Stored in watts; non-negative.
class Power {
 public:
  static Power watts(double w);
  static Power milliwatts(double mw);
  static constexpr Power zero() { return Power(0.0); }

  constexpr double watts() const noexcept { return w_; }
  constexpr double milliwatts() const noexcept { return w_ * 1e3; }

  friend constexpr auto operator<=>(Power, Power) = default;

 private:
  constexpr explicit Power(double w) : w_(w) {}
  double w_;
};

/// Spectral width around a center wavelength: nm <-> GHz.
double bandwidth_nm_to_ghz(double bandwidth_nm, Wavelength center);
double bandwidth_ghz_to_nm(double bandwidth_ghz, Wavelength center);

/// Throws ValidationError unless 0 <= value <= 1.
void require_fraction(double value, const char* name);

}  // namespace qfconv
