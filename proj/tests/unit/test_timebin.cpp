#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "qfconv/errors.hpp"
#include "qfconv/timebin.hpp"

using namespace qfconv;

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Brute force: propagate the early/late amplitudes through splitter matrix
// [[t, i r], [i r, t]], short/long arms and the second splitter; sum the
// four path pairs per (port, slot). Partial coherence mixes the coherent
// intensity with the incoherent sum of the two contributions.
struct OracleSlots {
  std::array<double, 3> port[2];
};

OracleSlots amplitude_oracle(double phi, double gamma, double we, double wl, double T, double vmax) {
  const double t = std::sqrt(T), r = std::sqrt(1 - T);
  const cd bs[2][2] = {{t, cd(0, r)}, {cd(0, r), t}};
  const cd in_bin[2] = {std::sqrt(we), std::sqrt(wl) * std::exp(cd(0, phi))};
  OracleSlots out{};
  for (int port = 0; port < 2; ++port) {
    // contributions[slot] holds amplitudes arriving in that slot.
    std::vector<cd> contributions[3];
    for (int bin = 0; bin < 2; ++bin) {
      for (int arm = 0; arm < 2; ++arm) {  // 0 short, 1 long
        const cd arm_phase = arm == 1 ? std::exp(cd(0, gamma)) : cd(1, 0);
        const cd amp = in_bin[bin] * bs[arm][0] * arm_phase * bs[port][arm];
        contributions[bin + arm].push_back(amp);
      }
    }
    for (int slot = 0; slot < 3; ++slot) {
      cd coherent = 0;
      double incoherent = 0;
      for (const cd& a : contributions[slot]) {
        coherent += a;
        incoherent += std::norm(a);
      }
      out.port[port][slot] = vmax * std::norm(coherent) + (1 - vmax) * incoherent;
    }
  }
  return out;
}

std::vector<double> full_period(int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(2 * kPi * i / n);
  return g;
}

}  // namespace

TEST(SlotOracle, MatchesOnPhaseGrid) {
  for (double T : {0.5, 0.3}) {
    for (double vmax : {1.0, 0.96}) {
      for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
          const double phi = 2 * kPi * i / 20, gamma = 2 * kPi * j / 20;
          Interferometer ifm{100.0, gamma, vmax, T};
          const auto q = TimeBinQubit::make(phi, 0.5, 0.5, 100.0);
          const OracleSlots o = amplitude_oracle(phi, gamma, 0.5, 0.5, T, vmax);
          // Splitter output 1 is the cross port.
          const SlotCounts cross = port_slot_statistics(q, ifm, 1.0, OutputPort::kCross);
          const SlotCounts bar = port_slot_statistics(q, ifm, 1.0, OutputPort::kBar);
          EXPECT_NEAR(cross.early, o.port[1][0], 1e-10);
          EXPECT_NEAR(cross.central, o.port[1][1], 1e-10);
          EXPECT_NEAR(cross.late, o.port[1][2], 1e-10);
          EXPECT_NEAR(bar.early, o.port[0][0], 1e-10);
          EXPECT_NEAR(bar.central, o.port[0][1], 1e-10);
          EXPECT_NEAR(bar.late, o.port[0][2], 1e-10);
        }
      }
    }
  }
}

TEST(SlotOracle, UnequalWeights) {
  const auto q = TimeBinQubit::make(0.7, 0.8, 0.2);
  Interferometer ifm{100.0, 0.2, 1.0, 0.5};
  const OracleSlots o = amplitude_oracle(0.7, 0.2, 0.8, 0.2, 0.5, 1.0);
  const SlotCounts cross = port_slot_statistics(q, ifm, 1.0, OutputPort::kCross);
  EXPECT_NEAR(cross.central, o.port[1][1], 1e-12);
  EXPECT_NEAR(cross.early, o.port[1][0], 1e-12);
}

TEST(Slots, BothPortsSumToInputForAllPhases) {
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      Interferometer ifm{100.0, 0.31 * j, 1.0, 0.5};
      const auto q = TimeBinQubit::make(0.29 * i);
      const double total = port_slot_statistics(q, ifm, 1.0, OutputPort::kCross).total() +
                           port_slot_statistics(q, ifm, 1.0, OutputPort::kBar).total();
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Slots, GammaAveragedFractions) {
  const auto q = TimeBinQubit::make(1.1);
  Interferometer ifm;
  double e = 0, c = 0, l = 0;
  const int n = 40;
  for (int k = 0; k < n; ++k) {
    ifm.phase_rad = 2 * kPi * k / n;
    const SlotCounts s = slot_statistics(q, ifm, 1.0, 0.0);
    e += s.early / n;
    c += s.central / n;
    l += s.late / n;
  }
  EXPECT_NEAR(e, 0.25, 1e-12);
  EXPECT_NEAR(c, 0.5, 1e-12);
  EXPECT_NEAR(l, 0.25, 1e-12);
}

TEST(Slots, DestructiveInterference) {
  Interferometer ifm{100.0, 0.0, 1.0, 0.5};
  const SlotCounts s = slot_statistics(TimeBinQubit::make(kPi), ifm, 1.0, 0.0);
  EXPECT_NEAR(s.central, 0.0, 1e-15);
}

TEST(Slots, VmaxCapsVisibility) {
  Interferometer ifm{100.0, 0.0, 0.96, 0.5};
  const FringeScan scan = fringe_scan(TimeBinQubit::make(0.0), ifm, 1.0, 0.0, full_period(16));
  EXPECT_NEAR(scan.visibility, 0.96, 1e-10);
}

TEST(Slots, Errors) {
  Interferometer ifm;
  ifm.delay_ns = 90.0;
  EXPECT_THROW(slot_statistics(TimeBinQubit::make(0.0), ifm, 1.0, 0.0), ValidationError);
  EXPECT_THROW(slot_statistics(TimeBinQubit::make(0.0), Interferometer{}, 1.0, -0.1), ValidationError);
  EXPECT_THROW(TimeBinQubit::make(0.0, -1.0, 1.0), ValidationError);
  EXPECT_THROW(TimeBinQubit::make(0.0, 0.5, 0.5, 0.0), ValidationError);
  Interferometer bad;
  bad.max_visibility = 1.2;
  EXPECT_THROW(slot_statistics(TimeBinQubit::make(0.0), bad, 1.0, 0.0), ValidationError);
}

TEST(VisibilityModel, Examples) {
  EXPECT_DOUBLE_EQ(visibility_model(std::numeric_limits<double>::infinity(), 0.7, 0.96), 0.96);
  EXPECT_NEAR(visibility_model(0.35, 0.7, 0.9), 0.45, 1e-15);
  EXPECT_NEAR(visibility_model(25.0, 0.7, 1.0), 0.9862, 1e-4);
}

TEST(VisibilityModel, CentralSlotSnrIdentity) {
  for (double mu : {0.1, 1.0, 6.1, 25.0}) {
    const double snr = central_slot_snr(mu, 0.7);
    EXPECT_NEAR(visibility_model(mu, 0.7, 0.96), 0.96 * snr / (snr + 1), 1e-15);
  }
}

TEST(FringeScan, NoiselessUnitVisibility) {
  Interferometer ifm{100.0, 0.0, 1.0, 0.5};
  const FringeScan scan = fringe_scan(TimeBinQubit::make(0.4), ifm, 2.0, 0.0, full_period(12));
  EXPECT_NEAR(scan.visibility, 1.0, 1e-10);
}

TEST(FringeScan, NoiseInCentralSlotReproducesVisibilityModel) {
  Interferometer ifm{100.0, 0.0, 1.0, 0.5};
  for (double mu : {0.5, 5.0, 20.0}) {
    const FringeScan scan = fringe_scan(TimeBinQubit::make(0.0), ifm, mu, central_slot_noise(0.7), full_period(10));
    EXPECT_NEAR(scan.visibility, visibility_model(mu, 0.7, 1.0), 1e-10);
  }
}

TEST(FringeScan, ConstantNoiseReducesVisibility) {
  Interferometer ifm{100.0, 0.0, 1.0, 0.5};
  double prev = 2;
  for (double noise : {0.0, 0.1, 0.5, 2.0}) {
    const double v = fringe_scan(TimeBinQubit::make(0.0), ifm, 1.0, noise, full_period(8)).visibility;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(FringeScan, CountingNoiseMatchesModel) {
  Interferometer ifm{100.0, 0.0, 1.0, 0.5};
  const FringeScan scan = fringe_scan_counts(TimeBinQubit::make(0.0), ifm, 5.0, central_slot_noise(0.7),
                                             full_period(24), 1.5e-3, 1e5, 20130517);
  EXPECT_GT(scan.visibility_sigma, 0.0);
  EXPECT_NEAR(scan.visibility, visibility_model(5.0, 0.7, 1.0), 3 * scan.visibility_sigma);
}

TEST(FringeScan, RejectsUndersampledGrid) {
  Interferometer ifm;
  EXPECT_THROW(fringe_scan(TimeBinQubit::make(0.0), ifm, 1.0, 0.0, full_period(4)), ValidationError);
  const std::vector<double> half{0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
  EXPECT_THROW(fringe_scan(TimeBinQubit::make(0.0), ifm, 1.0, 0.0, half), ValidationError);
}

TEST(Fidelity, FromVisibility) {
  EXPECT_DOUBLE_EQ(fidelity_from_visibility(1.0), 1.0);
  EXPECT_DOUBLE_EQ(fidelity_from_visibility(0.0), 0.5);
  EXPECT_DOUBLE_EQ(fidelity_from_visibility(0.9), 0.95);
  EXPECT_THROW(fidelity_from_visibility(1.1), ValidationError);
  EXPECT_THROW(fidelity_from_visibility(-0.1), ValidationError);
}

namespace {

// Independent big-sum oracle: direct sum to n = 200 with the pmf built by
// recursion and the normalizer summed, not taken in closed form.
double bound_oracle(double mu, double eta) {
  double pmf = std::exp(-mu), num = 0, den = 0;
  for (int n = 1; n <= 200; ++n) {
    pmf *= mu / n;
    const double w = pmf * (1.0 - std::pow(1.0 - eta, n));
    num += w * (n + 1.0) / (n + 2.0);
    den += w;
  }
  return num / den;
}

}  // namespace

TEST(ClassicalBound, MatchesBigSumOracle) {
  for (double mu : {0.01, 0.5, 2.0, 6.1, 25.0, 50.0}) {
    for (double eta : {1.0, 0.25, 0.11, 0.028}) {
      EXPECT_NEAR(classical_fidelity_bound(mu, eta), bound_oracle(mu, eta), 1e-10) << mu << " " << eta;
    }
  }
}

TEST(ClassicalBound, RegressionAnchor) {
  EXPECT_NEAR(classical_fidelity_bound(6.1, 0.25), 0.872386, 1e-6);
}

TEST(ClassicalBound, Limits) {
  EXPECT_NEAR(classical_fidelity_bound(1e-6, 1.0), 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(classical_fidelity_bound(1e-6, 0.01), 2.0 / 3.0, 1e-6);
  EXPECT_GT(classical_fidelity_bound(1e4, 1.0), 0.999);
  EXPECT_THROW(classical_fidelity_bound(0.0, 1.0), ValidationError);
  EXPECT_THROW(classical_fidelity_bound(1.0, 0.0), ValidationError);
}

TEST(ClassicalBound, MonotoneInMuAndDecreasingInEta) {
  double prev = 0;
  for (int i = 0; i < 100; ++i) {
    const double mu = 0.1 + (50.0 - 0.1) * i / 99;
    const double f = classical_fidelity_bound(mu, 1.0);
    EXPECT_GT(f, prev);
    prev = f;
    EXPECT_GE(classical_fidelity_bound(mu, 0.11), f);
    EXPECT_GE(classical_fidelity_bound(mu, 0.028), classical_fidelity_bound(mu, 0.11));
  }
}

TEST(RegimeReport, ModelDataExceedBound) {
  Dataset v("mu_in", "V");
  for (double mu = 2; mu <= 25; mu += 0.5) v.add(mu, visibility_model(mu, 0.7, 1.0));
  for (const RegimeRow& r : quantum_regime_report(v, 0.11, 0.028)) {
    EXPECT_TRUE(r.exceeds_ext) << r.mu_in;
    EXPECT_TRUE(r.exceeds_dev) << r.mu_in;
    EXPECT_GE(r.bound_ext, r.bound_eta1);
  }
}

TEST(RegimeReport, ZeroVisibilityNeverExceeds) {
  Dataset v("mu_in", "V");
  for (double mu = 0.5; mu <= 25; mu += 2) v.add(mu, 0.0);
  for (const RegimeRow& r : quantum_regime_report(v, 0.11, 0.028)) {
    EXPECT_FALSE(r.exceeds_eta1 || r.exceeds_ext || r.exceeds_dev);
  }
}
