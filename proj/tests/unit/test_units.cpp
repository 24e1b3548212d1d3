#include <gtest/gtest.h>

#include "qfconv/errors.hpp"
#include "qfconv/units.hpp"

using namespace qfconv;

TEST(Wavelength, RejectsNonPositive) {
  EXPECT_THROW(Wavelength::nanometers(0.0), ValidationError);
  EXPECT_THROW(Wavelength::nanometers(-780.0), ValidationError);
  EXPECT_THROW(Wavelength::nanometers(std::numeric_limits<double>::quiet_NaN()), ValidationError);
  EXPECT_DOUBLE_EQ(Wavelength::nanometers(780.24).nm(), 780.24);
}

TEST(Power, MilliwattsAndWattsAgree) {
  EXPECT_DOUBLE_EQ(Power::milliwatts(120.0).watts(), 0.12);
  EXPECT_DOUBLE_EQ(Power::watts(0.4).milliwatts(), 400.0);
  EXPECT_THROW(Power::watts(-1e-3), ValidationError);
  EXPECT_LT(Power::milliwatts(1.0), Power::milliwatts(2.0));
}

TEST(Bandwidth, FilterWidthInGigahertz) {
  const auto out = Wavelength::nanometers(1551.66);
  // c * dl / l^2
  const double expected = 299792458.0 * 0.68 / (1551.66 * 1551.66);
  EXPECT_NEAR(bandwidth_nm_to_ghz(0.68, out), expected, 1e-12);
  EXPECT_NEAR(bandwidth_nm_to_ghz(0.68, out), 84.67, 0.01);
  EXPECT_NEAR(bandwidth_ghz_to_nm(bandwidth_nm_to_ghz(1.3, out), out), 1.3, 1e-12);
}

TEST(RequireFraction, Bounds) {
  EXPECT_NO_THROW(require_fraction(0.0, "x"));
  EXPECT_NO_THROW(require_fraction(1.0, "x"));
  EXPECT_THROW(require_fraction(1.0001, "x"), ValidationError);
  EXPECT_THROW(require_fraction(-0.1, "x"), ValidationError);
}
