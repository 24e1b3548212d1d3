#include "qfconv/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace qfconv {

namespace {

enum class Kind { kReal, kInteger, kBool };

struct Unit {
  std::string_view name;
  double scale;  // canonical = value * scale
};

struct Key {
  std::string_view section;
  std::string_view name;
  Kind kind;
  std::vector<Unit> units;  // first is canonical; empty = dimensionless
  bool required;
  std::function<void(ScenarioConfig&, double)> set;
  std::function<double(const ScenarioConfig&)> get;
};

constexpr double kGhzMarker = -1.0;

const std::vector<Key>& keys() {
  using C = ScenarioConfig;
  static const std::vector<Key> table = {
      {"wavelengths", "input", Kind::kReal, {{"nm", 1.0}}, false,
       [](C& c, double v) { c.chain.input_wavelength = Wavelength::nanometers(v); },
       [](const C& c) { return c.chain.input_wavelength.nm(); }},
      {"wavelengths", "pump", Kind::kReal, {{"nm", 1.0}}, false,
       [](C& c, double v) { c.chain.pump_wavelength = Wavelength::nanometers(v); },
       [](const C& c) { return c.chain.pump_wavelength.nm(); }},

      {"waveguide", "length", Kind::kReal, {{"cm", 1.0}, {"mm", 0.1}}, false,
       [](C& c, double v) { c.chain.waveguide_length_cm = v; },
       [](const C& c) { return c.chain.waveguide_length_cm; }},
      {"waveguide", "normalized_efficiency", Kind::kReal, {{"per_W_cm2", 1.0}}, false,
       [](C& c, double v) { c.chain.normalized_efficiency = v; },
       [](const C& c) { return c.chain.normalized_efficiency; }},
      {"waveguide", "internal_efficiency_max", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.internal_efficiency_max = v; },
       [](const C& c) { return c.chain.internal_efficiency_max; }},

      {"losses.input", "input_lens", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.input.input_lens = v; },
       [](const C& c) { return c.chain.losses.input.input_lens; }},
      {"losses.input", "coupling", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.input.coupling = v; },
       [](const C& c) { return c.chain.losses.input.coupling; }},
      {"losses.input", "propagation", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.input.propagation = v; },
       [](const C& c) { return c.chain.losses.input.propagation; }},
      {"losses.input", "output_lens", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.input.output_lens = v; },
       [](const C& c) { return c.chain.losses.input.output_lens; }},

      {"losses.pump", "input_lens", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.pump.input_lens = v; },
       [](const C& c) { return c.chain.losses.pump.input_lens; }},
      {"losses.pump", "coupling", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.pump.coupling = v; },
       [](const C& c) { return c.chain.losses.pump.coupling; }},
      {"losses.pump", "propagation", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.pump.propagation = v; },
       [](const C& c) { return c.chain.losses.pump.propagation; }},
      {"losses.pump", "output_lens", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.losses.pump.output_lens = v; },
       [](const C& c) { return c.chain.losses.pump.output_lens; }},

      // GHz is converted at the output wavelength once the whole document is read.
      {"filter", "bandwidth", Kind::kReal, {{"nm", 1.0}, {"GHz", kGhzMarker}}, false,
       [](C& c, double v) { c.chain.filter.bandwidth_nm = v; },
       [](const C& c) { return c.chain.filter.bandwidth_nm; }},
      {"filter", "fiber_coupling", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.filter.fiber_coupling = v; },
       [](const C& c) { return c.chain.filter.fiber_coupling; }},
      {"filter", "grating", Kind::kReal, {}, false, [](C& c, double v) { c.chain.filter.grating = v; },
       [](const C& c) { return c.chain.filter.grating; }},
      {"filter", "bandpass_longpass", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.filter.bandpass_longpass = v; },
       [](const C& c) { return c.chain.filter.bandpass_longpass; }},
      {"filter", "allow_extrapolation", Kind::kBool, {}, false,
       [](C& c, double v) { c.chain.filter.allow_extrapolation = v != 0.0; },
       [](const C& c) { return c.chain.filter.allow_extrapolation ? 1.0 : 0.0; }},

      {"detector", "gate_width", Kind::kReal, {{"ns", 1.0}, {"us", 1e3}}, true,
       [](C& c, double v) { c.chain.detector.gate_width_ns = v; },
       [](const C& c) { return c.chain.detector.gate_width_ns; }},
      {"detector", "efficiency", Kind::kReal, {}, false,
       [](C& c, double v) { c.chain.detector.efficiency = v; },
       [](const C& c) { return c.chain.detector.efficiency; }},
      {"detector", "dark_rate", Kind::kReal, {{"per_ns", 1.0}, {"Hz", 1e-9}}, false,
       [](C& c, double v) { c.chain.detector.dark_rate_per_ns = v; },
       [](const C& c) { return c.chain.detector.dark_rate_per_ns; }},
      {"detector", "dead_time", Kind::kReal, {{"us", 1.0}, {"ns", 1e-3}}, false,
       [](C& c, double v) { c.chain.detector.dead_time_us = v; },
       [](const C& c) { return c.chain.detector.dead_time_us; }},
      {"detector", "allow_nonstandard_gate", Kind::kBool, {}, false,
       [](C& c, double v) { c.chain.detector.allow_nonstandard_gate = v != 0.0; },
       [](const C& c) { return c.chain.detector.allow_nonstandard_gate ? 1.0 : 0.0; }},

      {"noise", "alpha", Kind::kReal, {{"per_mW", 1.0}}, false,
       [](C& c, double v) { c.chain.noise.alpha_per_mw = v; },
       [](const C& c) { return c.chain.noise.alpha_per_mw; }},
      {"noise", "reference_gate", Kind::kReal, {{"ns", 1.0}}, false,
       [](C& c, double v) { c.chain.noise.reference_gate_ns = v; },
       [](const C& c) { return c.chain.noise.reference_gate_ns; }},
      {"noise", "reference_bandwidth", Kind::kReal, {{"nm", 1.0}}, false,
       [](C& c, double v) { c.chain.noise.reference_bandwidth_nm = v; },
       [](const C& c) { return c.chain.noise.reference_bandwidth_nm; }},
      {"noise", "alpha_crystal", Kind::kReal, {{"per_mW_ns", 1.0}}, false,
       [](C& c, double v) { c.chain.noise.alpha_crystal_per_mw_ns = v; },
       [](const C& c) { return c.chain.noise.alpha_crystal_per_mw_ns; }},

      {"source", "mu_in", Kind::kReal, {}, true, [](C& c, double v) { c.source.mu_in = v; },
       [](const C& c) { return c.source.mu_in; }},
      {"source", "pulse_fwhm", Kind::kReal, {{"ns", 1.0}}, false,
       [](C& c, double v) { c.chain.pulse.fwhm_ns = v; }, [](const C& c) { return c.chain.pulse.fwhm_ns; }},
      {"source", "pulse_center", Kind::kReal, {{"ns", 1.0}}, false,
       [](C& c, double v) { c.chain.pulse.center_ns = v; }, [](const C& c) { return c.chain.pulse.center_ns; }},
      {"source", "repetition_rate", Kind::kReal, {{"MHz", 1.0}, {"kHz", 1e-3}}, false,
       [](C& c, double v) { c.source.repetition_rate_mhz = v; },
       [](const C& c) { return c.source.repetition_rate_mhz; }},

      {"pump", "pump_power", Kind::kReal, {{"mW", 1.0}, {"W", 1e3}}, true,
       [](C& c, double v) { c.pump = Power::milliwatts(v); }, [](const C& c) { return c.pump.milliwatts(); }},

      {"interferometer", "delay", Kind::kReal, {{"ns", 1.0}}, false,
       [](C& c, double v) { c.interferometer.delay_ns = v; },
       [](const C& c) { return c.interferometer.delay_ns; }},
      {"interferometer", "max_visibility", Kind::kReal, {}, false,
       [](C& c, double v) { c.interferometer.max_visibility = v; },
       [](const C& c) { return c.interferometer.max_visibility; }},
      {"interferometer", "splitter_ratio", Kind::kReal, {}, false,
       [](C& c, double v) { c.interferometer.splitter_ratio = v; },
       [](const C& c) { return c.interferometer.splitter_ratio; }},

      {"montecarlo", "seed", Kind::kInteger, {}, true,
       [](C& c, double v) { c.montecarlo.seed = static_cast<std::uint64_t>(v); },
       [](const C& c) { return static_cast<double>(c.montecarlo.seed); }},
      {"montecarlo", "shots", Kind::kInteger, {}, false,
       [](C& c, double v) { c.montecarlo.shots = static_cast<std::uint64_t>(v); },
       [](const C& c) { return static_cast<double>(c.montecarlo.shots); }},
      {"montecarlo", "threads", Kind::kInteger, {}, false,
       [](C& c, double v) { c.montecarlo.threads = static_cast<unsigned>(v); },
       [](const C& c) { return static_cast<double>(c.montecarlo.threads); }},
      {"montecarlo", "histogram_bin", Kind::kReal, {{"ns", 1.0}}, false,
       [](C& c, double v) { c.montecarlo.histogram_bin_ns = v; },
       [](const C& c) { return c.montecarlo.histogram_bin_ns; }},
      {"montecarlo", "histogram_window", Kind::kReal, {{"ns", 1.0}}, false,
       [](C& c, double v) { c.montecarlo.histogram_window_ns = v; },
       [](const C& c) { return c.montecarlo.histogram_window_ns; }},

      {"fitting", "weighted", Kind::kBool, {}, false, [](C& c, double v) { c.weighted_fits = v != 0.0; },
       [](const C& c) { return c.weighted_fits ? 1.0 : 0.0; }},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string qualified(const Key& k) { return std::string(k.section) + "." + std::string(k.name); }

// Shortest representation that round-trips.
std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct ParsedValue {
  double value;
  bool ghz;
};

ParsedValue parse_value(const Key& k, std::string_view raw, std::size_t line) {
  const std::string where = qualified(k);
  if (k.kind == Kind::kBool) {
    if (raw == "true") return {1.0, false};
    if (raw == "false") return {0.0, false};
    throw ConfigParseError(line, where + ": expected true or false, got '" + std::string(raw) + "'");
  }

  const auto space = raw.find_first_of(" \t");
  const std::string_view number = raw.substr(0, space);
  const std::string_view unit = space == std::string_view::npos ? std::string_view{} : trim(raw.substr(space));

  double value = 0.0;
  if (k.kind == Kind::kInteger) {
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(number.data(), number.data() + number.size(), n);
    if (ec != std::errc{} || p != number.data() + number.size()) {
      throw ConfigParseError(line, where + ": expected a non-negative integer, got '" + std::string(number) + "'");
    }
    if (n > (std::uint64_t{1} << 53)) throw ConfigParseError(line, where + ": integer too large");
    value = static_cast<double>(n);
  } else {
    auto [p, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec != std::errc{} || p != number.data() + number.size() || !std::isfinite(value)) {
      throw ConfigParseError(line, where + ": expected a number, got '" + std::string(number) + "'");
    }
  }

  if (k.units.empty()) {
    if (!unit.empty()) throw ConfigParseError(line, where + " is dimensionless; unexpected unit '" + std::string(unit) + "'");
    return {value, false};
  }
  if (unit.empty()) {
    throw ConfigParseError(line, where + ": missing unit suffix (expected " + std::string(k.units.front().name) + ")");
  }
  for (const auto& u : k.units) {
    if (u.name == unit) {
      if (u.scale == kGhzMarker) return {value, true};
      return {value * u.scale, false};
    }
  }
  std::string allowed;
  for (const auto& u : k.units) allowed += (allowed.empty() ? "" : ", ") + std::string(u.name);
  throw ConfigParseError(line, where + ": unit '" + std::string(unit) + "' not accepted (allowed: " + allowed + ")");
}

template <typename F>
void with_context(const char* section, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(section) + ": " + e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  with_context("wavelengths", [&] { (void)chain.output_wavelength(); });
  with_context("waveguide", [&] {
    require_fraction(chain.internal_efficiency_max, "internal_efficiency_max");
    chain.waveguide().validate();
  });
  with_context("losses", [&] { chain.losses.validate(); });
  with_context("filter", [&] { chain.filter.validate(); });
  with_context("detector", [&] { chain.detector.validate(); });
  with_context("noise", [&] { chain.noise.validate(); });
  with_context("source", [&] {
    if (!(chain.pulse.fwhm_ns > 0.0)) throw ValidationError("pulse_fwhm must be > 0 ns");
    if (!(source.mu_in >= 0.0)) throw ValidationError("mu_in must be >= 0");
    if (!(source.repetition_rate_mhz > 0.0)) throw ValidationError("repetition_rate must be > 0");
  });
  with_context("interferometer", [&] { interferometer.validate(); });
  with_context("montecarlo", [&] {
    if (montecarlo.shots == 0) throw ValidationError("shots must be > 0");
    if (!(montecarlo.histogram_bin_ns > 0.0)) throw ValidationError("histogram_bin must be > 0");
    if (!(montecarlo.histogram_window_ns >= montecarlo.histogram_bin_ns)) {
      throw ValidationError("histogram_window must be >= histogram_bin");
    }
  });
  with_context("scenario", [&] { scenario().validate(); });
}

ExperimentScenario ScenarioConfig::scenario() const {
  ExperimentScenario s;
  s.chain = chain;
  s.mu_in = source.mu_in;
  s.pump = pump;
  s.repetition_rate_mhz = source.repetition_rate_mhz;
  s.shots = montecarlo.shots;
  s.seed = montecarlo.seed;
  s.threads = montecarlo.threads;
  return s;
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::set<std::string_view> sections;
  for (const auto& k : keys()) sections.insert(k.section);

  std::set<std::string> seen;
  std::optional<double> bandwidth_ghz;
  std::string section;
  std::size_t line_no = 0;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigParseError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!sections.contains(section)) throw ConfigParseError(line_no, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParseError(line_no, "expected 'key = value'");
    const std::string_view name = trim(line.substr(0, eq));
    const std::string_view raw = trim(line.substr(eq + 1));
    if (name.empty()) throw ConfigParseError(line_no, "empty key");
    if (section.empty()) throw ConfigParseError(line_no, "key '" + std::string(name) + "' outside any section");
    if (raw.empty()) throw ConfigParseError(line_no, "missing value for '" + std::string(name) + "'");

    const Key* key = nullptr;
    for (const auto& k : keys()) {
      if (k.section == section && k.name == name) key = &k;
    }
    if (key == nullptr) throw ConfigParseError(line_no, "unknown key '" + std::string(name) + "' in [" + section + "]");
    if (!seen.insert(qualified(*key)).second) throw ConfigParseError(line_no, "duplicate key " + qualified(*key));

    const ParsedValue v = parse_value(*key, raw, line_no);
    if (v.ghz) {
      bandwidth_ghz = v.value;
      continue;
    }
    try {
      key->set(cfg, v.value);
    } catch (const ValidationError& e) {
      throw ConfigParseError(line_no, qualified(*key) + ": " + e.what());
    }
  }

  for (const auto& k : keys()) {
    if (k.required && !seen.contains(qualified(k))) {
      throw ValidationError("missing required key " + std::string(k.name) + " in [" + std::string(k.section) + "]");
    }
  }

  if (bandwidth_ghz) {
    with_context("filter", [&] {
      cfg.chain.filter.bandwidth_nm = bandwidth_ghz_to_nm(*bandwidth_ghz, cfg.chain.output_wavelength());
    });
  }

  cfg.validate();
  return cfg;
}

std::string serialize_config(const ScenarioConfig& config) {
  std::string out;
  std::string_view section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out += '\n';
      section = k.section;
      out += "[" + std::string(section) + "]\n";
    }
    const double v = k.get(config);
    out += std::string(k.name) + " = ";
    switch (k.kind) {
      case Kind::kBool:
        out += v != 0.0 ? "true" : "false";
        break;
      case Kind::kInteger:
        out += std::to_string(static_cast<std::uint64_t>(v));
        break;
      case Kind::kReal:
        out += shortest(v);
        break;
    }
    if (!k.units.empty()) out += " " + std::string(k.units.front().name);
    out += '\n';
  }
  return out;
}

ScenarioConfig reference_config() { return parse_config(reference_config_text()); }

std::string config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : serialize_config(config)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace qfconv
