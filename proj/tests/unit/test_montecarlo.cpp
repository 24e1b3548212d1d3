#include <gtest/gtest.h>

#include <cmath>

#include "qfconv/errors.hpp"
#include "qfconv/montecarlo.hpp"

using namespace qfconv;

namespace {

ExperimentScenario small(double mu, double pump_mw, std::uint64_t shots = 200000) {
  ExperimentScenario s;
  s.mu_in = mu;
  s.pump = Power::milliwatts(pump_mw);
  s.shots = shots;
  return s;
}

}  // namespace

TEST(Simulate, DarkOnlyAt100nsGate) {
  ExperimentScenario s = small(0.0, 0.0, 1000000);
  s.chain.detector.gate_width_ns = 100.0;
  const SimulationResult r = simulate(s, false);
  const double expected = -std::expm1(-1e-3);
  EXPECT_NEAR(r.input_blocked.p, expected, 3 * r.input_blocked.p_sigma);
  EXPECT_NEAR(r.signal_on.p, expected, 3 * r.signal_on.p_sigma);
}

TEST(Simulate, AgreesWithAnalyticModel) {
  for (double mw : {60.0, 250.0}) {
    const ExperimentScenario s = small(6.1, mw);
    const SimulationResult r = simulate(s, false);
    const RateBreakdown m = detection_probabilities(s.mu_in, s.pump, s.chain);
    EXPECT_NEAR(r.signal_on.p, m.p_signal, 3 * r.signal_on.p_sigma);
    EXPECT_NEAR(r.input_blocked.p, m.p_noise, 3 * r.input_blocked.p_sigma);
  }
}

TEST(Simulate, Deterministic) {
  const ExperimentScenario s = small(6.1, 120, 50000);
  const SimulationResult a = simulate(s, true);
  const SimulationResult b = simulate(s, true);
  EXPECT_EQ(a.signal_clicks, b.signal_clicks);
  EXPECT_EQ(a.blocked_clicks, b.blocked_clicks);
  EXPECT_EQ(a.signal_on.clicks, b.signal_on.clicks);
}

TEST(Simulate, ThreadCountDoesNotChangeResult) {
  ExperimentScenario s = small(6.1, 120, 60000);
  s.threads = 1;
  const SimulationResult one = simulate(s, true);
  s.threads = 7;
  const SimulationResult many = simulate(s, true);
  EXPECT_EQ(one.signal_clicks, many.signal_clicks);
  EXPECT_EQ(one.blocked_clicks, many.blocked_clicks);
}

TEST(Simulate, ClicksInsideGateOnePerShot) {
  const ExperimentScenario s = small(6.1, 120, 50000);
  const SimulationResult r = simulate(s, true);
  std::uint64_t last = 0;
  bool first = true;
  for (const auto& c : r.signal_clicks) {
    EXPECT_GE(c.time_ns, -10.0);
    EXPECT_LT(c.time_ns, 10.0);
    if (!first) EXPECT_GT(c.shot, last);
    last = c.shot;
    first = false;
  }
  EXPECT_EQ(r.signal_clicks.size(), r.signal_on.clicks);
}

TEST(Simulate, DeadTimeBookkeeping) {
  const ExperimentScenario s = small(6.1, 120, 200000);
  EXPECT_EQ(s.dead_gates(), 20u);
  const SimulationResult r = simulate(s, true);
  // Every click blocks the next 20 gates unless the run ends first.
  const std::uint64_t expected = r.signal_on.clicks * 20;
  EXPECT_LE(r.signal_on.skipped_gates, expected);
  EXPECT_GE(r.signal_on.skipped_gates + 20, expected);
  EXPECT_EQ(r.signal_on.live_gates + r.signal_on.skipped_gates, s.shots);
  // Skipped gates follow clicks.
  for (std::size_t i = 1; i < r.signal_clicks.size(); ++i) {
    EXPECT_GT(r.signal_clicks[i].shot - r.signal_clicks[i - 1].shot, 20u);
  }
}

TEST(Simulate, RejectsInvalidScenarios) {
  EXPECT_THROW(simulate(small(6.1, 120, 0)), ValidationError);
  EXPECT_THROW(simulate(small(-1.0, 120)), ValidationError);
  ExperimentScenario bright = small(1e4, 380);
  EXPECT_THROW(simulate(bright), ValidationError);
  ExperimentScenario fast = small(6.1, 120);
  fast.repetition_rate_mhz = 100.0;
  EXPECT_THROW(simulate(fast), ValidationError);
}

TEST(Simulate, PumpSweepStructure) {
  // Noise linear in pump; pure signal rises then falls past P*.
  const double mws[] = {100.0, 380.0, 900.0};
  double signal[3];
  for (int i = 0; i < 3; ++i) {
    const RateBreakdown m = detection_probabilities(6.1, Power::milliwatts(mws[i]), ConversionChain::reference());
    signal[i] = m.p_signal - m.p_noise;
  }
  EXPECT_GT(signal[1], signal[0]);
  EXPECT_GT(signal[1], signal[2]);
}

TEST(Histogram, Binning) {
  Histogram h(0.64, 100.0, 0.0);
  EXPECT_EQ(h.bins(), 157u);
  EXPECT_NEAR(h.bin_hi(156) - h.bin_lo(156), 0.16, 1e-9);
  EXPECT_TRUE(h.add(-50.0));
  EXPECT_FALSE(h.add(50.0));
  EXPECT_TRUE(h.add(49.99));
  EXPECT_EQ(h.counts.front(), 1u);
  EXPECT_EQ(h.counts.back(), 1u);
  EXPECT_THROW(Histogram(0.0, 100.0, 0.0), ValidationError);
  Histogram other(0.5, 100.0, 0.0);
  EXPECT_THROW(h += other, ValidationError);
}

TEST(GateIntegrate, Limits) {
  Histogram h(0.64, 100.0, 0.0);
  for (int i = 0; i < 1000; ++i) h.add(-49.0 + 0.098 * i);
  EXPECT_NEAR(gate_integrate(h, 100.0), static_cast<double>(h.total()), 1e-9);
  EXPECT_DOUBLE_EQ(gate_integrate(h, 0.0), 0.0);
  EXPECT_THROW(gate_integrate(h, 120.0), ValidationError);
}

TEST(GateIntegrate, NoiselessGaussianGivesBeta) {
  // Bin contents from the exact Gaussian CDF.
  Histogram h(0.64, 100.0, 0.0);
  const double sigma = 30.0 / kGaussianFwhmPerSigma;
  auto cdf = [&](double t) { return 0.5 * std::erfc(-t / (sigma * std::sqrt(2.0))); };
  for (std::size_t i = 0; i < h.bins(); ++i) {
    h.counts[i] = static_cast<std::uint64_t>(std::llround(1e9 * (cdf(h.bin_hi(i)) - cdf(h.bin_lo(i)))));
  }
  const double ratio = gate_integrate(h, 20.0) / gate_integrate(h, 100.0);
  const double expected = beta_factor(PulseShape::gaussian(30.0), 20.0) / beta_factor(PulseShape::gaussian(30.0), 100.0);
  // Linear interpolation inside the partial edge bins.
  EXPECT_NEAR(ratio, expected, 2e-4);
}

TEST(StartStop, DarkPedestalFlat) {
  ExperimentScenario s = small(5.0, 120, 1000000);
  const HistogramSet set = start_stop_histogram(s);
  EXPECT_GT(uniformity_test(set.dark_only).p_value, 0.01);
  EXPECT_GT(uniformity_test(set.pump_only).p_value, 0.01);
  EXPECT_EQ(set.signal_on.bins(), 157u);
}

TEST(Simulate, OriginTagsDoNotAffectEstimates) {
  // The estimate is recomputable from shot indices alone.
  const ExperimentScenario s = small(6.1, 120, 40000);
  SimulationResult r = simulate(s, true);
  for (auto& c : r.signal_clicks) c.origin = ClickOrigin::kDark;
  const double p = static_cast<double>(r.signal_clicks.size()) / static_cast<double>(r.signal_on.live_gates);
  EXPECT_DOUBLE_EQ(p, r.signal_on.p);
}
