#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "qfconv/errors.hpp"
#include "qfconv/montecarlo.hpp"
#include "qfconv/noise_detection.hpp"
#include "qfconv/timebin.hpp"

namespace qfconv {

/// Malformed document; carries the 1-based line number.
class ConfigParseError : public ValidationError {
 public:
  ConfigParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct SourceSettings {
  double mu_in = 6.1;
  double repetition_rate_mhz = 1.0;
};

struct MonteCarloSettings {
  std::uint64_t seed = 20130517;
  std::uint64_t shots = 1'000'000;
  unsigned threads = 0;
  double histogram_bin_ns = 0.64;
  double histogram_window_ns = 100.0;
};

struct ScenarioConfig {
  ConversionChain chain = ConversionChain::reference();
  SourceSettings source;
  Power pump = Power::milliwatts(120.0);
  Interferometer interferometer;
  MonteCarloSettings montecarlo;
  bool weighted_fits = false;

  void validate() const;
  ExperimentScenario scenario() const;
};

/// Sectioned `key = value` text. Dimensioned values need a unit suffix;
/// unknown sections/keys and duplicates are rejected. Keys not given fall
/// back to the reference apparatus except for the required ones
/// (mu_in, pump_power, gate_width, seed).
ScenarioConfig parse_config(std::string_view text);

/// Canonical text: fixed section/key order, canonical units, shortest
/// round-trip numbers.
std::string serialize_config(const ScenarioConfig& config);

/// The checked-in reference configuration.
std::string_view reference_config_text();
ScenarioConfig reference_config();

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

}  // namespace qfconv
