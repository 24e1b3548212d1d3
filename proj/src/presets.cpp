#include "qfconv/presets.hpp"

#include <algorithm>
#include <cmath>

#include "qfconv/fitting.hpp"
#include "qfconv/montecarlo.hpp"
#include "qfconv/rng.hpp"
#include "qfconv/timebin.hpp"

namespace qfconv {

namespace {

constexpr std::uint32_t kTagFig3a = 0x3a;
constexpr std::uint32_t kTagFig3b = 0x3b;

// lambda = -ln(1 - p) and its binomial sigma.
std::pair<double, double> mean_counts(const RunEstimate& r) {
  const double lambda = -std::log1p(-r.p);
  return {lambda, r.p_sigma / (1.0 - r.p)};
}

ExperimentScenario point_scenario(const ScenarioConfig& cfg, double pump_mw, std::uint32_t tag, std::size_t i) {
  ExperimentScenario sc = cfg.scenario();
  sc.pump = Power::milliwatts(pump_mw);
  sc.seed = derive_seed(cfg.montecarlo.seed, tag, i);
  return sc;
}

PresetOutput fig3a(const ScenarioConfig& cfg) {
  PresetOutput out{"fig3a", {}, {}};
  CsvTable t({"P_p_mW", "p_S", "p_S_sigma", "p_N", "p_N_sigma", "p_S_model", "p_N_model", "snr_dc",
              "snr_dc_sigma", "snr_dc_model"});
  const auto grid = SweepRange{0.0, 450.0, 16}.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ExperimentScenario sc = point_scenario(cfg, grid[i], kTagFig3a, i);
    const SimulationResult r = simulate(sc, false);
    const RateBreakdown m = detection_probabilities(sc.mu_in, sc.pump, sc.chain);
    t.add_row({grid[i], r.signal_on.p, r.signal_on.p_sigma, r.input_blocked.p, r.input_blocked.p_sigma, m.p_signal,
               m.p_noise, r.snr_dc, r.snr_dc_sigma, snr(m, DarkSubtraction::kKeep)});
  }
  out.tables.emplace_back("fig3a", std::move(t));
  out.scalars.emplace_back("mu_in", cfg.source.mu_in);
  return out;
}

PresetOutput fig3b(const ScenarioConfig& cfg) {
  PresetOutput out{"fig3b", {}, {}};
  const ConversionChain& chain = cfg.chain;
  const EfficiencyCascade eff = chain.efficiencies();
  // Detected signal counts per unit eta_ext: mu * eta_f * eta_d.
  const double per_eta_ext = cfg.source.mu_in * eff.filter * eff.detection;
  if (!(per_eta_ext > 0.0)) throw ValidationError("fig3b needs mu_in > 0");

  const auto grid = SweepRange{30.0, 450.0, 15}.grid();
  Dataset measured("P_p_mW", "eta_ext");
  std::vector<double> snr_values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SimulationResult r = simulate(point_scenario(cfg, grid[i], kTagFig3b, i), false);
    const auto [ls, ss] = mean_counts(r.signal_on);
    const auto [ln, sn] = mean_counts(r.input_blocked);
    measured.add(grid[i], (ls - ln) / per_eta_ext, std::hypot(ss, sn) / per_eta_ext);
    snr_values.push_back(r.snr_dc);
  }

  CsvTable t({"P_p_mW", "eta_ext", "eta_ext_ci_lo", "eta_ext_ci_hi", "snr_dc"});
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const DataPoint& p = measured[i];
    const double half = 1.959963984540054 * p.sigma;
    t.add_row({p.x, p.y, p.y - half, p.y + half, snr_values[i]});
  }
  out.tables.emplace_back("fig3b", std::move(t));

  FitOptions opts;
  opts.use_weights = cfg.weighted_fits;
  const FitResult fit = fit_conversion(measured, chain.waveguide_length_cm, opts);
  const NonlinearModel model = conversion_model(chain.waveguide_length_cm);
  CsvTable curve({"P_p_mW", "eta_ext_fit", "band_lo", "band_hi"});
  for (double x : SweepRange{0.0, 450.0, 91}.grid()) {
    const auto [v, h] = prediction_band(fit, model, x);
    curve.add_row({x, v, v - h, v + h});
  }
  out.tables.emplace_back("fig3b_fit", std::move(curve));

  const Estimate& l2 = fit.derived_value("eta_n_L2");
  out.scalars = {{"eta_ext_max", fit.param("eta_ext_max").value},
                 {"eta_ext_max_ci", fit.param("eta_ext_max").ci_half_width},
                 {"eta_n", fit.param("eta_n").value},
                 {"eta_n_L2", l2.value},
                 {"eta_n_L2_ci", l2.ci_half_width},
                 {"ill_conditioned", fit.ill_conditioned ? 1.0 : 0.0}};
  return out;
}

PresetOutput fig4a(const ScenarioConfig& cfg) {
  PresetOutput out{"fig4a", {}, {}};
  CsvTable t({"bandwidth_nm", "bandwidth_GHz", "mu1"});
  Dataset line("bandwidth_nm", "mu1");
  ConversionChain chain = cfg.chain;
  for (double bw : SweepRange{FilterStage::kMinBandwidthNm, FilterStage::kMaxBandwidthNm, 12}.grid()) {
    chain.filter.bandwidth_nm = bw;
    const double m = mu1(chain, cfg.pump);
    t.add_row({bw, bandwidth_nm_to_ghz(bw, chain.output_wavelength()), m});
    line.add(bw, m);
  }
  out.tables.emplace_back("fig4a", std::move(t));
  const FitResult through_origin = fit_linear(line, true);
  const FitResult free = fit_linear(line, false);
  out.scalars = {{"pump_mW", cfg.pump.milliwatts()},
                 {"slope_per_nm", through_origin.params[0].value},
                 {"free_intercept", free.param("intercept").value},
                 {"mu1_reference", mu1(cfg.chain, cfg.pump)}};
  return out;
}

PresetOutput fig5a(const ScenarioConfig& cfg) {
  PresetOutput out{"fig5a", {}, {}};
  ConversionChain c20 = cfg.chain;
  c20.detector.gate_width_ns = 20.0;
  ConversionChain c50 = cfg.chain;
  c50.detector.gate_width_ns = 50.0;
  const double mu1_20 = mu1(c20, cfg.pump);
  const double mu1_50 = mu1(c50, cfg.pump);
  // Displayed visibilities are corrected for the interferometer's V_max.
  const double v0 = 1.0;
  const double eta_ext = external_efficiency(cfg.pump, cfg.chain.waveguide());
  const double eta_dev = eta_ext * cfg.chain.efficiencies().filter;

  CsvTable t({"mu_in", "V_20", "V_50", "F_c_20", "F_c_50", "F_class_eta1", "F_class_ext", "F_class_dev"});
  for (double mu : SweepRange{0.5, 25.0, 50}.grid()) {
    const double v20 = visibility_model(mu, mu1_20, v0);
    const double v50 = visibility_model(mu, mu1_50, v0);
    t.add_row({mu, v20, v50, fidelity_from_visibility(v20), fidelity_from_visibility(v50),
               classical_fidelity_bound(mu, 1.0), classical_fidelity_bound(mu, eta_ext),
               classical_fidelity_bound(mu, eta_dev)});
  }
  out.tables.emplace_back("fig5a", std::move(t));
  out.scalars = {{"mu1_20ns", mu1_20}, {"mu1_50ns", mu1_50}, {"V_max", cfg.interferometer.max_visibility}, {"eta_ext", eta_ext},
                 {"eta_dev", eta_dev}};
  return out;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3a", "fig3b", "fig4a", "fig5a"};
  return names;
}

bool is_preset(std::string_view name) {
  const auto& n = preset_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

PresetOutput run_preset(std::string_view name, const ScenarioConfig& config) {
  if (name == "fig3a") return fig3a(config);
  if (name == "fig3b") return fig3b(config);
  if (name == "fig4a") return fig4a(config);
  if (name == "fig5a") return fig5a(config);
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

}  // namespace qfconv
