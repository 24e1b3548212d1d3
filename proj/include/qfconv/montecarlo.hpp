#pragma once

#include <cstdint>
#include <vector>

#include "qfconv/noise_detection.hpp"

namespace qfconv {

/// One simulation unit: the converter plus source settings and pump power.
struct ExperimentScenario {
  ConversionChain chain = ConversionChain::reference();
  double mu_in = 6.1;
  Power pump = Power::milliwatts(120.0);
  double repetition_rate_mhz = 1.0;
  std::uint64_t shots = 1'000'000;
  std::uint64_t seed = 20130517;
  /// Worker threads; 0 picks the hardware concurrency. Results do not depend on it.
  unsigned threads = 0;

  void validate() const;
  /// Gates skipped after each click: ceil(dead_time * repetition_rate).
  std::uint64_t dead_gates() const;
};

enum class ClickOrigin : std::uint8_t { kSignal = 0, kPumpNoise = 1, kDark = 2 };

const char* to_string(ClickOrigin origin);

/// A registered click. The origin is diagnostic only; no estimator reads it.
struct ClickRecord {
  std::uint64_t shot = 0;
  double time_ns = 0;
  ClickOrigin origin = ClickOrigin::kDark;

  friend bool operator==(const ClickRecord&, const ClickRecord&) = default;
};

/// Click probability estimate from one run of gates.
struct RunEstimate {
  std::uint64_t live_gates = 0;
  std::uint64_t skipped_gates = 0;
  std::uint64_t clicks = 0;
  double p = 0;
  /// Binomial standard error sqrt(p (1 - p) / live_gates).
  double p_sigma = 0;
};

struct SimulationResult {
  RunEstimate signal_on;      // p_S
  RunEstimate input_blocked;  // p_N
  double snr_dc = 0;
  double snr_dc_sigma = 0;
  std::vector<ClickRecord> signal_clicks;
  std::vector<ClickRecord> blocked_clicks;
};

/// Shot-level simulation of the p_S / p_N measurement.
///
/// Per shot: n ~ Poisson(mu_in) photons, each surviving the converter with
/// probability eta_tot^M f_hat(P) / beta and arriving at a Gaussian time; the
/// gate then keeps the in-window ones. Pump noise and dark counts are flat
/// Poisson processes over the gate. The earliest event clicks, and the next
/// dead_gates() gates are skipped and excluded from the denominator.
///
/// Throws ValidationError when more than 0.5 clicks per gate are expected.
SimulationResult simulate(const ExperimentScenario& scenario, bool keep_clicks = true);

/// Start-stop timing histogram over a fixed window centered on the pulse.
struct Histogram {
  double bin_width_ns = 0.64;
  double window_ns = 100.0;
  double start_ns = -50.0;
  std::vector<std::uint64_t> counts;

  Histogram() = default;
  Histogram(double bin_width_ns, double window_ns, double center_ns);

  std::size_t bins() const noexcept { return counts.size(); }
  double bin_lo(std::size_t i) const noexcept { return start_ns + static_cast<double>(i) * bin_width_ns; }
  /// Upper edge; the final bin is truncated at the window end.
  double bin_hi(std::size_t i) const noexcept;
  double bin_center(std::size_t i) const noexcept { return 0.5 * (bin_lo(i) + bin_hi(i)); }
  double center_ns() const noexcept { return start_ns + 0.5 * window_ns; }
  std::uint64_t total() const noexcept;
  /// Adds a time; returns false when it falls outside the window.
  bool add(double time_ns) noexcept;
  /// Bin-wise sum; throws ValidationError on mismatched binning.
  Histogram& operator+=(const Histogram& other);
};

/// The three series of the start-stop measurement.
struct HistogramSet {
  Histogram signal_on;  // input and pump on
  Histogram pump_only;  // input blocked
  Histogram dark_only;  // waveguide input blocked
  RunEstimate signal_run;
  RunEstimate pump_run;
  RunEstimate dark_run;
};

/// Runs the three start-stop series with the detector gate opened to the
/// full histogram window.
HistogramSet start_stop_histogram(const ExperimentScenario& scenario, double bin_width_ns = 0.64,
                                  double window_ns = 100.0);

/// Sum of the bins inside a gate centered on the window, with partially
/// covered bins weighted by their overlap.
double gate_integrate(const Histogram& h, double gate_ns);

struct GateIntegrals {
  double signal = 0;  // S
  double noise = 0;   // N
  double dark = 0;    // DC
};
GateIntegrals gate_integrate(const HistogramSet& set, double gate_ns);

struct ChiSquareResult {
  double statistic = 0;
  double dof = 0;
  double p_value = 0;
};

/// Pearson chi-square test of a histogram against a flat distribution, with
/// expected counts proportional to bin width.
ChiSquareResult uniformity_test(const Histogram& h);

}  // namespace qfconv
