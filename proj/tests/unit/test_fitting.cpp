#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qfconv/errors.hpp"
#include "qfconv/fitting.hpp"
#include "qfconv/optics_chain.hpp"
#include "qfconv/rng.hpp"

using namespace qfconv;

namespace {

double conversion(double mw, double eta_max, double eta_n, double length = 3.0) {
  const double s = std::sin(length * std::sqrt(mw * 1e-3 * eta_n));
  return eta_max * s * s;
}

Dataset conversion_data(double lo, double hi, int n, double noise, std::uint64_t seed) {
  Dataset d("P_p_mW", "eta_ext");
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    SubstreamEngine e(seed, 0, static_cast<std::uint64_t>(i));
    d.add(x, conversion(x, 0.25, 0.72) * (1.0 + noise * sample_normal(e)));
  }
  return d;
}

}  // namespace

TEST(TQuantile, KnownValues) {
  EXPECT_NEAR(t_quantile_95(10), 2.228139, 1e-6);
  EXPECT_NEAR(t_quantile_95(1), 12.7062, 1e-4);
  EXPECT_TRUE(std::isinf(t_quantile_95(0)));
}

TEST(FitLinear, ExactLineRoundTrip) {
  Dataset d;
  for (double p = 0; p <= 400; p += 25) d.add(p, 6e-6 * p + 2e-4);
  const FitResult f = fit_linear(d, false);
  EXPECT_NEAR(f.param("slope").value, 6e-6, 1e-18);
  EXPECT_NEAR(f.param("intercept").value, 2e-4, 1e-16);
}

TEST(FitLinear, ResidualsOrthogonalToDesign) {
  Dataset d;
  for (int i = 0; i < 30; ++i) {
    SubstreamEngine e(11, 0, static_cast<std::uint64_t>(i));
    d.add(i * 0.3, 1.5 * i * 0.3 - 2.0 + sample_normal(e));
  }
  const FitResult f = fit_linear(d, false);
  double dot_one = 0, dot_x = 0, scale_one = 0, scale_x = 0;
  for (const auto& p : d.points()) {
    const double r = p.y - (f.param("slope").value * p.x + f.param("intercept").value);
    dot_one += r;
    dot_x += r * p.x;
    scale_one += std::abs(p.y);
    scale_x += std::abs(p.y * p.x);
  }
  EXPECT_LT(std::abs(dot_one) / scale_one, 1e-10);
  EXPECT_LT(std::abs(dot_x) / scale_x, 1e-10);
}

TEST(FitLinear, SlopeCoverageOnNoisyBandwidthData) {
  const double slope = 0.7 / 0.68;
  int covered = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    Dataset d("bandwidth_nm", "mu1");
    for (int i = 0; i < 12; ++i) {
      const double bw = 0.65 + i * 0.15;
      SubstreamEngine e(k, 4, static_cast<std::uint64_t>(i));
      d.add(bw, slope * bw * (1.0 + 0.1 * sample_normal(e)));
    }
    const Estimate s = fit_linear(d, true).param("slope");
    if (std::abs(s.value - slope) <= s.ci_half_width) ++covered;
  }
  EXPECT_GE(covered, 176);
  EXPECT_LE(covered, 198);
}

TEST(FitLinear, ForcedOriginInflatesResiduals) {
  Dataset d;
  for (int i = 0; i < 10; ++i) d.add(i, 2.0 * i + 5.0 + 0.1 * ((i % 3) - 1));
  EXPECT_GT(fit_linear(d, true).rss, fit_linear(d, false).rss);
}

TEST(FitLinear, SingularDesign) {
  Dataset d;
  for (int i = 0; i < 5; ++i) d.add(1.0, i);
  EXPECT_THROW(fit_linear(d, false), NumericalError);
}

TEST(FitConversion, NoiselessRoundTrip) {
  const FitResult f = fit_conversion(conversion_data(30, 450, 15, 0.0, 0), 3.0);
  EXPECT_NEAR(f.param("eta_ext_max").value / 0.25, 1.0, 1e-6);
  EXPECT_NEAR(f.param("eta_n").value / 0.72, 1.0, 1e-6);
  EXPECT_NEAR(f.derived_value("eta_n_L2").value / 6.48, 1.0, 1e-6);
  EXPECT_FALSE(f.ill_conditioned);
}

TEST(FitConversion, OrderInvariant) {
  const Dataset d = conversion_data(30, 450, 15, 0.05, 3);
  Dataset reversed;
  for (auto it = d.points().rbegin(); it != d.points().rend(); ++it) reversed.add(it->x, it->y);
  const FitResult a = fit_conversion(d, 3.0);
  const FitResult b = fit_conversion(reversed, 3.0);
  EXPECT_EQ(a.params[0].value, b.params[0].value);
  EXPECT_EQ(a.params[1].value, b.params[1].value);
}

TEST(FitConversion, CoverageStudy) {
  int covered = 0;
  double bias = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    const Estimate e = fit_conversion(conversion_data(30, 450, 15, 0.05, 1000 + k), 3.0).derived_value("eta_n_L2");
    bias += e.value - 6.48;
    if (std::abs(e.value - 6.48) <= e.ci_half_width) ++covered;
  }
  EXPECT_LT(std::abs(bias / 200) / 6.48, 0.03);
  EXPECT_GE(covered, 180);
}

TEST(FitConversion, LinearRegimeFlagged) {
  const FitResult f = fit_conversion(conversion_data(2, 40, 15, 0.0, 0), 3.0);
  EXPECT_TRUE(f.ill_conditioned);
}

TEST(FitConversion, NonConvergenceCarriesBestParameters) {
  FitOptions opts;
  opts.max_iterations = 1;
  try {
    fit_conversion(conversion_data(30, 450, 15, 0.05, 9), 3.0, opts);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    ASSERT_EQ(e.best_params().size(), 2u);
    EXPECT_TRUE(std::isfinite(e.best_params()[0]));
  }
}

TEST(ExtractMu1, ExactLine) {
  Dataset d;
  for (double mu = 0.2; mu <= 6.0; mu += 0.4) d.add(mu, mu / 0.7);
  EXPECT_NEAR(extract_mu1(d).value, 0.7, 1e-12);
}

TEST(ExtractMu1, ScalingSnrScalesMu1Inversely) {
  Dataset d, scaled;
  for (int i = 0; i < 10; ++i) {
    const double mu = 0.2 + 0.5 * i;
    const double s = mu / 0.7 * (1.0 + 0.03 * std::sin(i));
    d.add(mu, s);
    scaled.add(mu, 2.5 * s);
  }
  EXPECT_NEAR(extract_mu1(scaled).value, extract_mu1(d).value / 2.5, 1e-12);
}

TEST(ExtractMu1, NoisyTenPercentData) {
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    SubstreamEngine e(31, 0, static_cast<std::uint64_t>(i));
    const double mu = 0.3 + 0.6 * i;
    d.add(mu, mu / 0.7 * (1.0 + 0.1 * sample_normal(e)));
  }
  EXPECT_NEAR(extract_mu1(d).value, 0.7, 0.1);
}

TEST(ExtractMu1, NoCrossingInRange) {
  Dataset d;
  for (double mu = 2.0; mu <= 5.0; mu += 0.5) d.add(mu, mu / 0.7);
  EXPECT_THROW(extract_mu1(d), NumericalError);
}

TEST(FitGaussian, RoundTrip) {
  Dataset d;
  const double sigma = 30.0 / kGaussianFwhmPerSigma;
  for (double t = -50; t < 50; t += 0.64) d.add(t, 200.0 * std::exp(-(t - 1.5) * (t - 1.5) / (2 * sigma * sigma)));
  const FitResult f = fit_gaussian(d);
  EXPECT_NEAR(f.derived_value("fwhm").value, 30.0, 1e-6);
  EXPECT_NEAR(f.param("center").value, 1.5, 1e-6);
}

TEST(PredictionBand, ZeroAtOriginAndPositiveElsewhere) {
  const FitResult f = fit_conversion(conversion_data(30, 450, 15, 0.05, 5), 3.0);
  const NonlinearModel m = conversion_model(3.0);
  const auto [v0, h0] = prediction_band(f, m, 0.0);
  EXPECT_DOUBLE_EQ(v0, 0.0);
  EXPECT_DOUBLE_EQ(h0, 0.0);
  const auto [v, h] = prediction_band(f, m, 200.0);
  EXPECT_GT(v, 0.0);
  EXPECT_GT(h, 0.0);
}

TEST(Sweep, SinglePointRange) {
  const Dataset d = sweep(SweepRange{3.0, 3.0, 10}, [](double x) { return Observation{2 * x, 0}; });
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].y, 6.0);
}

TEST(Sweep, ErrorsCarryGridPointAndType) {
  auto bad = [](double x) -> Observation {
    if (x > 2.5) throw DegenerateDenominator("boom");
    return {x, 0};
  };
  try {
    sweep(SweepRange{0, 5, 6}, bad);
    FAIL();
  } catch (const DegenerateDenominator& e) {
    EXPECT_NE(std::string(e.what()).find("x = 3"), std::string::npos);
  }
}

TEST(Sweep, ConversionCurvePeaksAtOptimalPump) {
  const WaveguideParams wg{3.0, 0.72, 0.25};
  const Dataset d = sweep(SweepRange{0, 450, 901}, [&](double mw) {
    return Observation{external_efficiency(Power::milliwatts(mw), wg), 0};
  });
  const auto peak = std::max_element(d.points().begin(), d.points().end(),
                                     [](const DataPoint& a, const DataPoint& b) { return a.y < b.y; });
  EXPECT_NEAR(peak->x, optimal_pump_power(wg).milliwatts(), 0.5);
}
