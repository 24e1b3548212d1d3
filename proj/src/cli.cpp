#include "qfconv/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "qfconv/config.hpp"
#include "qfconv/csv.hpp"
#include "qfconv/fitting.hpp"
#include "qfconv/presets.hpp"
#include "qfconv/report.hpp"

namespace qfconv {

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  std::optional<std::string> preset;
  std::string out_dir = ".";
  std::optional<double> gate_ns;
  std::optional<double> pump_mw;
  std::optional<double> mu;
  std::optional<double> bandwidth_nm;
  std::optional<std::string> input;
  std::string model = "conversion";
  bool quick = false;
};

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string() + " for writing");
  f << text;
}

ScenarioConfig load_config(const Flags& flags) {
  ScenarioConfig cfg =
      flags.config_path ? parse_config(read_file(*flags.config_path)) : parse_config(reference_config_text());
  if (flags.seed) cfg.montecarlo.seed = *flags.seed;
  if (flags.shots) cfg.montecarlo.shots = *flags.shots;
  if (flags.gate_ns) cfg.chain.detector.gate_width_ns = *flags.gate_ns;
  if (flags.pump_mw) cfg.pump = Power::milliwatts(*flags.pump_mw);
  if (flags.mu) cfg.source.mu_in = *flags.mu;
  if (flags.bandwidth_nm) cfg.chain.filter.bandwidth_nm = *flags.bandwidth_nm;
  cfg.validate();
  return cfg;
}

ReportBundle bundle_for(const std::string& command, const ScenarioConfig& cfg) {
  ReportBundle b;
  b.command = command;
  b.config_hash = config_hash(cfg);
  b.seed = cfg.montecarlo.seed;
  return b;
}

int cmd_simulate(const Flags& flags, std::ostream& out) {
  const ScenarioConfig cfg = load_config(flags);
  const ExperimentScenario sc = cfg.scenario();
  const SimulationResult r = simulate(sc, true);
  const fs::path dir(flags.out_dir);
  fs::create_directories(dir);
  const CsvTable summary = simulation_summary(sc, r);
  summary.save(dir / "simulate.csv");
  click_table(r).save(dir / "clicks.csv");

  ReportBundle b = bundle_for("simulate", cfg);
  b.datasets = {{"summary", "simulate.csv"}, {"clicks", "clicks.csv"}};
  const RateBreakdown m = detection_probabilities(sc.mu_in, sc.pump, sc.chain);
  b.scalars = {{"p_S", r.signal_on.p},
               {"p_N", r.input_blocked.p},
               {"snr_dc", r.snr_dc},
               {"snr_dc_sigma", r.snr_dc_sigma},
               {"snr_dc_model", snr(m, DarkSubtraction::kKeep)},
               {"eta_tot_max", sc.chain.efficiencies().total_max},
               {"mu1", mu1(sc.chain, sc.pump)}};
  write_text(dir / "simulate.json", b.to_json());
  summary.write(out);
  return kExitOk;
}

int cmd_sweep(const Flags& flags, std::ostream& out) {
  const ScenarioConfig cfg = load_config(flags);
  const PresetOutput result = run_preset(*flags.preset, cfg);
  const fs::path dir(flags.out_dir);
  fs::create_directories(dir);
  ReportBundle b = bundle_for("sweep " + result.name, cfg);
  for (const auto& [stem, table] : result.tables) {
    table.save(dir / (stem + ".csv"));
    b.datasets.emplace_back(stem, stem + ".csv");
  }
  b.scalars = result.scalars;
  write_text(dir / (result.name + ".json"), b.to_json());
  result.tables.front().second.write(out);
  return kExitOk;
}

void add_estimate(CsvTable& t, const Estimate& e) {
  t.add_row({e.name, e.value, e.std_error, e.value - e.ci_half_width, e.value + e.ci_half_width});
}

int cmd_fit(const Flags& flags, std::ostream& out) {
  const ScenarioConfig cfg = load_config(flags);
  const Dataset data = read_dataset_csv(*flags.input);
  FitOptions opts;
  opts.use_weights = cfg.weighted_fits;

  CsvTable t({"parameter", "value", "std_error", "ci95_lo", "ci95_hi"});
  ReportBundle b = bundle_for("fit " + flags.model, cfg);
  if (flags.model == "mu1") {
    const Estimate e = extract_mu1(data, opts);
    add_estimate(t, e);
    b.scalars = {{"mu1", e.value}};
  } else {
    FitResult fit;
    if (flags.model == "linear") {
      fit = fit_linear(data, false, opts);
    } else if (flags.model == "linear0") {
      fit = fit_linear(data, true, opts);
    } else if (flags.model == "conversion") {
      fit = fit_conversion(data, cfg.chain.waveguide_length_cm, opts);
    } else {
      fit = fit_gaussian(data, opts);
    }
    for (const auto& e : fit.params) add_estimate(t, e);
    for (const auto& e : fit.derived) add_estimate(t, e);
    for (const auto& e : fit.params) b.scalars.emplace_back(e.name, e.value);
    for (const auto& e : fit.derived) b.scalars.emplace_back(e.name, e.value);
    b.scalars.emplace_back("rss", fit.rss);
    b.scalars.emplace_back("dof", fit.dof);
    b.scalars.emplace_back("ill_conditioned", fit.ill_conditioned ? 1.0 : 0.0);
  }
  const fs::path dir(flags.out_dir);
  fs::create_directories(dir);
  t.save(dir / "fit.csv");
  b.datasets = {{"parameters", "fit.csv"}};
  write_text(dir / "fit.json", b.to_json());
  t.write(out);
  return kExitOk;
}

int cmd_report(const Flags& flags, std::ostream& out) {
  const ScenarioConfig cfg = load_config(flags);
  ReproductionOptions opts;
  opts.sampled = !flags.quick;
  const auto rows = reproduction_table(cfg, opts);
  const fs::path dir(flags.out_dir);
  fs::create_directories(dir);
  reproduction_csv(rows).save(dir / "report.csv");

  ReportBundle b = bundle_for("report", cfg);
  b.datasets = {{"reproduction", "report.csv"}};
  const EfficiencyCascade e = cfg.chain.efficiencies();
  b.scalars = {{"eta_ext_max", e.external_max},
               {"eta_dev_max", e.device_max},
               {"eta_tot_max", e.total_max},
               {"mu1", mu1(cfg.chain, cfg.pump)}};
  int failed = 0;
  for (const auto& r : rows) failed += r.pass ? 0 : 1;
  b.scalars.emplace_back("checks", static_cast<double>(rows.size()));
  b.scalars.emplace_back("failed", static_cast<double>(failed));
  write_text(dir / "report.json", b.to_json());

  out << std::left << std::setw(4) << "#" << std::setw(36) << "quantity" << std::setw(16) << "value"
      << std::setw(28) << "accepted" << std::setw(20) << "reference" << "status\n";
  for (const auto& r : rows) {
    out << std::setw(4) << r.criterion << std::setw(36) << r.quantity << std::setw(16) << format_number(r.value)
        << std::setw(28) << ("[" + format_number(r.lo) + ", " + format_number(r.hi) + "]") << std::setw(20)
        << r.reference << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  out << rows.size() - static_cast<std::size_t>(failed) << "/" << rows.size() << " checks pass\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-conversion interface simulator", "qfconv"};
  app.set_version_flag("--version", std::string(toolkit_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config_path, "Scenario config file (default: built-in reference)");
  app.add_option("--seed", flags.seed, "Top-level random seed");
  app.add_option("--shots", flags.shots, "Monte Carlo shots per run");
  app.add_option("--out", flags.out_dir, "Output directory");
  app.add_option("--gate", flags.gate_ns, "Detector gate width in ns (20, 50 or 100)");
  app.add_option("--pump-mw", flags.pump_mw, "Pump power in mW");
  app.add_option("--mu", flags.mu, "Mean input photon number");
  app.add_option("--bandwidth-nm", flags.bandwidth_nm, "Filter bandwidth in nm");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo p_S / p_N estimate");
  auto* sweep_cmd = app.add_subcommand("sweep", "Named reproduction datasets");
  sweep_cmd->add_option("--preset", flags.preset, "fig3a | fig3b | fig4a | fig5a")
      ->required()
      ->check(CLI::IsMember(preset_names()));
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to an (x, y[, sigma]) CSV");
  fit_cmd->add_option("--input", flags.input, "Input CSV")->required();
  fit_cmd->add_option("--model", flags.model, "linear | linear0 | conversion | mu1 | gaussian")
      ->check(CLI::IsMember({"linear", "linear0", "conversion", "mu1", "gaussian"}));
  auto* report_cmd = app.add_subcommand("report", "Reproduction table with pass/fail per check");
  report_cmd->add_flag("--quick", flags.quick, "Skip the sampled (Monte Carlo / fit recovery) checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << toolkit_version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(flags, out);
    if (*sweep_cmd) return cmd_sweep(flags, out);
    if (*fit_cmd) return cmd_fit(flags, out);
    if (*report_cmd) return cmd_report(flags, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DegenerateDenominator& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace qfconv
