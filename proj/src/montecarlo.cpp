#include "qfconv/montecarlo.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "qfconv/errors.hpp"
#include "qfconv/rng.hpp"

namespace qfconv {

namespace {

// Substream tags; each run of gates draws from its own family of streams.
constexpr std::uint32_t kStreamSignalOn = 1;
constexpr std::uint32_t kStreamInputBlocked = 2;
constexpr std::uint32_t kStreamHistSignal = 11;
constexpr std::uint32_t kStreamHistPump = 12;
constexpr std::uint32_t kStreamHistDark = 13;

constexpr double kMaxClicksPerGate = 0.5;

struct RunSpec {
  double mu = 0;
  double survival = 0;
  double pulse_center_ns = 0;
  double pulse_sigma_ns = 1;
  double gate_lo_ns = 0;
  double gate_hi_ns = 0;
  double noise_rate_per_ns = 0;
  double dark_rate_per_ns = 0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  std::uint64_t dead_gates = 0;
  unsigned threads = 0;

  double gate_ns() const { return gate_hi_ns - gate_lo_ns; }
  double expected_clicks(double beta) const {
    return mu * survival * beta + (noise_rate_per_ns + dark_rate_per_ns) * gate_ns();
  }
};

struct ShotOutcome {
  double time_ns = std::numeric_limits<double>::infinity();
  ClickOrigin origin = ClickOrigin::kDark;
  bool clicked = false;
};

ShotOutcome simulate_shot(const RunSpec& spec, std::uint64_t shot) {
  SubstreamEngine engine(spec.seed, spec.stream, shot);
  ShotOutcome out;
  auto consider = [&](double t, ClickOrigin origin) {
    if (t >= spec.gate_lo_ns && t < spec.gate_hi_ns && t < out.time_ns) {
      out.time_ns = t;
      out.origin = origin;
      out.clicked = true;
    }
  };

  const std::uint64_t photons = sample_poisson(engine, spec.mu);
  for (std::uint64_t i = 0; i < photons; ++i) {
    if (engine.uniform() < spec.survival) {
      consider(spec.pulse_center_ns + spec.pulse_sigma_ns * sample_normal(engine), ClickOrigin::kSignal);
    }
  }
  const double gate = spec.gate_ns();
  const std::uint64_t noise = sample_poisson(engine, spec.noise_rate_per_ns * gate);
  for (std::uint64_t i = 0; i < noise; ++i) {
    consider(spec.gate_lo_ns + engine.uniform() * gate, ClickOrigin::kPumpNoise);
  }
  const std::uint64_t dark = sample_poisson(engine, spec.dark_rate_per_ns * gate);
  for (std::uint64_t i = 0; i < dark; ++i) {
    consider(spec.gate_lo_ns + engine.uniform() * gate, ClickOrigin::kDark);
  }
  return out;
}

unsigned resolve_threads(unsigned requested, std::uint64_t shots) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t min_chunk = 4096;
  const std::uint64_t useful = std::max<std::uint64_t>(1, shots / min_chunk);
  return static_cast<unsigned>(std::min<std::uint64_t>(n, useful));
}

// Shots are independent, so outcomes are computed in parallel by contiguous
// chunks; dead-time bookkeeping is a sequential pass in shot order.
RunEstimate run_gates(const RunSpec& spec, std::vector<ClickRecord>* clicks, Histogram* hist) {
  std::vector<ShotOutcome> outcomes(spec.shots);
  const unsigned nthreads = resolve_threads(spec.threads, spec.shots);
  auto fill = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t s = begin; s < end; ++s) outcomes[s] = simulate_shot(spec, s);
  };
  if (nthreads <= 1) {
    fill(0, spec.shots);
  } else {
    std::vector<std::jthread> workers;
    const std::uint64_t chunk = (spec.shots + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
      const std::uint64_t begin = std::min<std::uint64_t>(spec.shots, t * chunk);
      const std::uint64_t end = std::min<std::uint64_t>(spec.shots, begin + chunk);
      workers.emplace_back(fill, begin, end);
    }
  }

  RunEstimate est;
  std::uint64_t skip = 0;
  for (std::uint64_t s = 0; s < spec.shots; ++s) {
    if (skip > 0) {
      --skip;
      ++est.skipped_gates;
      continue;
    }
    ++est.live_gates;
    const ShotOutcome& o = outcomes[s];
    if (!o.clicked) continue;
    ++est.clicks;
    skip = spec.dead_gates;
    if (clicks) clicks->push_back(ClickRecord{s, o.time_ns, o.origin});
    if (hist) hist->add(o.time_ns);
  }
  est.p = est.live_gates ? static_cast<double>(est.clicks) / static_cast<double>(est.live_gates) : 0.0;
  est.p_sigma = est.live_gates ? std::sqrt(est.p * (1.0 - est.p) / static_cast<double>(est.live_gates)) : 0.0;
  return est;
}

RunSpec base_spec(const ExperimentScenario& sc, double gate_ns) {
  const ConversionChain& chain = sc.chain;
  const EfficiencyCascade eff = chain.efficiencies();
  RunSpec spec;
  // eta_tot^M / beta: the gate supplies beta through the arrival time.
  spec.survival = eff.external_max * eff.filter * chain.detector.efficiency *
                  normalized_conversion(sc.pump, chain.waveguide());
  spec.pulse_center_ns = chain.pulse.center_ns;
  spec.pulse_sigma_ns = chain.pulse.sigma_ns();
  spec.gate_lo_ns = chain.pulse.center_ns - 0.5 * gate_ns;
  spec.gate_hi_ns = chain.pulse.center_ns + 0.5 * gate_ns;
  spec.noise_rate_per_ns = chain.noise.detected_rate_per_ns(sc.pump, chain.filter.bandwidth_nm);
  spec.dark_rate_per_ns = chain.detector.dark_rate_per_ns;
  spec.shots = sc.shots;
  spec.seed = sc.seed;
  spec.dead_gates = sc.dead_gates();
  spec.threads = sc.threads;
  return spec;
}

void check_validity_bound(const RunSpec& spec, const PulseShape& pulse) {
  const double beta = beta_factor(pulse, spec.gate_ns());
  const double expected = spec.expected_clicks(beta);
  if (expected > kMaxClicksPerGate) {
    throw ValidationError("scenario expects " + std::to_string(expected) +
                          " clicks per gate; the gated model is limited to 0.5");
  }
}

}  // namespace

const char* to_string(ClickOrigin origin) {
  switch (origin) {
    case ClickOrigin::kSignal:
      return "signal";
    case ClickOrigin::kPumpNoise:
      return "pump-noise";
    case ClickOrigin::kDark:
      return "dark";
  }
  return "unknown";
}

void ExperimentScenario::validate() const {
  chain.validate();
  if (!(mu_in >= 0.0) || !std::isfinite(mu_in)) throw ValidationError("mu_in must be finite and >= 0");
  if (shots == 0) throw ValidationError("shots must be > 0");
  if (!(repetition_rate_mhz > 0.0)) throw ValidationError("repetition_rate must be > 0");
  const double period_ns = 1e3 / repetition_rate_mhz;
  if (!(period_ns > chain.detector.gate_width_ns)) {
    throw ValidationError("repetition period must exceed the gate width");
  }
}

std::uint64_t ExperimentScenario::dead_gates() const {
  const double gates = chain.detector.dead_time_us * repetition_rate_mhz;
  return static_cast<std::uint64_t>(std::ceil(gates - 1e-9));
}

SimulationResult simulate(const ExperimentScenario& scenario, bool keep_clicks) {
  scenario.validate();
  RunSpec on = base_spec(scenario, scenario.chain.detector.gate_width_ns);
  on.mu = scenario.mu_in;
  on.stream = kStreamSignalOn;
  check_validity_bound(on, scenario.chain.pulse);
  RunSpec off = on;
  off.mu = 0.0;
  off.stream = kStreamInputBlocked;

  SimulationResult r;
  r.signal_on = run_gates(on, keep_clicks ? &r.signal_clicks : nullptr, nullptr);
  r.input_blocked = run_gates(off, keep_clicks ? &r.blocked_clicks : nullptr, nullptr);

  const double ps = r.signal_on.p;
  const double pn = r.input_blocked.p;
  if (pn > 0.0) {
    r.snr_dc = (ps - pn) / pn;
    const double ds = r.signal_on.p_sigma / pn;
    const double dn = ps * r.input_blocked.p_sigma / (pn * pn);
    r.snr_dc_sigma = std::sqrt(ds * ds + dn * dn);
  } else {
    r.snr_dc = std::numeric_limits<double>::quiet_NaN();
    r.snr_dc_sigma = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

Histogram::Histogram(double bin_width_ns, double window_ns, double center_ns)
    : bin_width_ns(bin_width_ns), window_ns(window_ns), start_ns(center_ns - 0.5 * window_ns) {
  if (!(bin_width_ns > 0.0)) throw ValidationError("histogram bin width must be > 0");
  if (!(window_ns > 0.0)) throw ValidationError("histogram window must be > 0");
  const double n = std::ceil(window_ns / bin_width_ns - 1e-9);
  counts.assign(static_cast<std::size_t>(n), 0);
}

double Histogram::bin_hi(std::size_t i) const noexcept {
  return std::min(bin_lo(i) + bin_width_ns, start_ns + window_ns);
}

std::uint64_t Histogram::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

bool Histogram::add(double time_ns) noexcept {
  const double rel = time_ns - start_ns;
  if (!(rel >= 0.0) || rel >= window_ns) return false;
  auto i = static_cast<std::size_t>(rel / bin_width_ns);
  if (i >= counts.size()) i = counts.size() - 1;
  ++counts[i];
  return true;
}

Histogram& Histogram::operator+=(const Histogram& other) {
  if (other.bin_width_ns != bin_width_ns || other.window_ns != window_ns || other.start_ns != start_ns) {
    throw ValidationError("cannot merge histograms with different binning");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

HistogramSet start_stop_histogram(const ExperimentScenario& scenario, double bin_width_ns, double window_ns) {
  ExperimentScenario sc = scenario;
  sc.chain.detector.gate_width_ns = window_ns;
  sc.chain.detector.allow_nonstandard_gate = true;
  sc.validate();

  const double center = sc.chain.pulse.center_ns;
  HistogramSet set{Histogram(bin_width_ns, window_ns, center), Histogram(bin_width_ns, window_ns, center),
                   Histogram(bin_width_ns, window_ns, center), {}, {}, {}};

  RunSpec signal = base_spec(sc, window_ns);
  signal.mu = sc.mu_in;
  signal.stream = kStreamHistSignal;
  check_validity_bound(signal, sc.chain.pulse);

  RunSpec pump = signal;
  pump.mu = 0.0;
  pump.stream = kStreamHistPump;

  RunSpec dark = pump;
  dark.noise_rate_per_ns = 0.0;
  dark.stream = kStreamHistDark;

  set.signal_run = run_gates(signal, nullptr, &set.signal_on);
  set.pump_run = run_gates(pump, nullptr, &set.pump_only);
  set.dark_run = run_gates(dark, nullptr, &set.dark_only);
  return set;
}

double gate_integrate(const Histogram& h, double gate_ns) {
  if (!(gate_ns >= 0.0)) throw ValidationError("gate width must be >= 0");
  if (gate_ns > h.window_ns + 1e-9) throw ValidationError("gate wider than the histogram window");
  const double lo = h.center_ns() - 0.5 * gate_ns;
  const double hi = h.center_ns() + 0.5 * gate_ns;
  double sum = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double a = std::max(lo, h.bin_lo(i));
    const double b = std::min(hi, h.bin_hi(i));
    if (b <= a) continue;
    sum += static_cast<double>(h.counts[i]) * (b - a) / (h.bin_hi(i) - h.bin_lo(i));
  }
  return sum;
}

GateIntegrals gate_integrate(const HistogramSet& set, double gate_ns) {
  return {gate_integrate(set.signal_on, gate_ns), gate_integrate(set.pump_only, gate_ns),
          gate_integrate(set.dark_only, gate_ns)};
}

ChiSquareResult uniformity_test(const Histogram& h) {
  if (h.bins() < 2) throw ValidationError("uniformity test needs at least two bins");
  const double total = static_cast<double>(h.total());
  if (!(total > 0.0)) throw NumericalError("uniformity test on an empty histogram");
  ChiSquareResult r;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double expected = total * (h.bin_hi(i) - h.bin_lo(i)) / h.window_ns;
    const double d = static_cast<double>(h.counts[i]) - expected;
    r.statistic += d * d / expected;
  }
  r.dof = static_cast<double>(h.bins() - 1);
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

}  // namespace qfconv
