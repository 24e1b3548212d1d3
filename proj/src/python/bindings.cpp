#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qfconv/cli.hpp"
#include "qfconv/config.hpp"
#include "qfconv/fitting.hpp"
#include "qfconv/presets.hpp"
#include "qfconv/report.hpp"
#include "qfconv/timebin.hpp"

namespace py = pybind11;
using namespace qfconv;

namespace {

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["ci95"] = e.ci_half_width;
  return d;
}

py::dict fit_dict(const FitResult& fit) {
  py::dict params;
  for (const auto& e : fit.params) params[py::str(e.name)] = estimate_dict(e);
  py::dict derived;
  for (const auto& e : fit.derived) derived[py::str(e.name)] = estimate_dict(e);
  py::dict d;
  d["params"] = params;
  d["derived"] = derived;
  d["rss"] = fit.rss;
  d["dof"] = fit.dof;
  d["ill_conditioned"] = fit.ill_conditioned;
  return d;
}

Dataset make_dataset(const std::vector<double>& x, const std::vector<double>& y,
                     const std::optional<std::vector<double>>& sigma) {
  if (x.size() != y.size()) throw ValidationError("x and y must have the same length");
  if (sigma && sigma->size() != x.size()) throw ValidationError("sigma must match x in length");
  Dataset d;
  for (std::size_t i = 0; i < x.size(); ++i) d.add(x[i], y[i], sigma ? (*sigma)[i] : 0.0);
  return d;
}

py::dict run_dict(const RunEstimate& r) {
  py::dict d;
  d["live_gates"] = r.live_gates;
  d["skipped_gates"] = r.skipped_gates;
  d["clicks"] = r.clicks;
  d["p"] = r.p;
  d["p_sigma"] = r.p_sigma;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frequency-conversion interface simulator";
  m.attr("__version__") = std::string(toolkit_version());

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_property(
          "mu_in", [](const ScenarioConfig& c) { return c.source.mu_in; },
          [](ScenarioConfig& c, double v) { c.source.mu_in = v; })
      .def_property(
          "pump_mw", [](const ScenarioConfig& c) { return c.pump.milliwatts(); },
          [](ScenarioConfig& c, double v) { c.pump = Power::milliwatts(v); })
      .def_property(
          "gate_ns", [](const ScenarioConfig& c) { return c.chain.detector.gate_width_ns; },
          [](ScenarioConfig& c, double v) { c.chain.detector.gate_width_ns = v; })
      .def_property(
          "bandwidth_nm", [](const ScenarioConfig& c) { return c.chain.filter.bandwidth_nm; },
          [](ScenarioConfig& c, double v) { c.chain.filter.bandwidth_nm = v; })
      .def_property(
          "seed", [](const ScenarioConfig& c) { return c.montecarlo.seed; },
          [](ScenarioConfig& c, std::uint64_t v) { c.montecarlo.seed = v; })
      .def_property(
          "shots", [](const ScenarioConfig& c) { return c.montecarlo.shots; },
          [](ScenarioConfig& c, std::uint64_t v) { c.montecarlo.shots = v; })
      .def("validate", &ScenarioConfig::validate)
      .def("serialize", [](const ScenarioConfig& c) { return serialize_config(c); })
      .def("hash", [](const ScenarioConfig& c) { return config_hash(c); });

  m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
  m.def("reference_config", &reference_config);
  m.def("reference_config_text", [] { return std::string(reference_config_text()); });

  m.def(
      "efficiencies",
      [](const ScenarioConfig& c) {
        const EfficiencyCascade e = c.chain.efficiencies();
        py::dict d;
        d["coupling"] = e.coupling;
        d["waveguide_transmission"] = e.waveguide_transmission;
        d["filter"] = e.filter;
        d["detection"] = e.detection;
        d["internal_max"] = e.internal_max;
        d["external_max"] = e.external_max;
        d["device_max"] = e.device_max;
        d["total_max"] = e.total_max;
        return d;
      },
      py::arg("config"));
  m.def(
      "optimal_pump_mw", [](const ScenarioConfig& c) { return optimal_pump_power(c.chain.waveguide()).milliwatts(); },
      py::arg("config"));
  m.def(
      "external_efficiency",
      [](const ScenarioConfig& c, double pump_mw) {
        return external_efficiency(Power::milliwatts(pump_mw), c.chain.waveguide());
      },
      py::arg("config"), py::arg("pump_mw"));
  m.def(
      "beta_factor", [](double fwhm_ns, double gate_ns) { return beta_factor(PulseShape::gaussian(fwhm_ns), gate_ns); },
      py::arg("pulse_fwhm_ns"), py::arg("gate_ns"));
  m.def(
      "detection_probabilities",
      [](const ScenarioConfig& c, double mu, double pump_mw) {
        const RateBreakdown r = detection_probabilities(mu, Power::milliwatts(pump_mw), c.chain);
        py::dict d;
        d["p_signal"] = r.p_signal;
        d["p_noise"] = r.p_noise;
        d["p_dark"] = r.p_dark;
        d["signal_counts"] = r.signal_counts;
        d["noise_counts"] = r.noise_counts;
        d["dark_counts"] = r.dark_counts;
        d["beta"] = r.beta;
        d["snr_dc"] = snr(r, DarkSubtraction::kKeep);
        return d;
      },
      py::arg("config"), py::arg("mu_in"), py::arg("pump_mw"));
  m.def(
      "mu1", [](const ScenarioConfig& c, double pump_mw) { return mu1(c.chain, Power::milliwatts(pump_mw)); },
      py::arg("config"), py::arg("pump_mw"));

  m.def(
      "simulate",
      [](const ScenarioConfig& c) {
        const SimulationResult r = [&] {
          py::gil_scoped_release release;
          return simulate(c.scenario(), false);
        }();
        py::dict d;
        d["signal_on"] = run_dict(r.signal_on);
        d["input_blocked"] = run_dict(r.input_blocked);
        d["snr_dc"] = r.snr_dc;
        d["snr_dc_sigma"] = r.snr_dc_sigma;
        return d;
      },
      py::arg("config"));

  m.def(
      "fit_conversion",
      [](const std::vector<double>& pump_mw, const std::vector<double>& eta, double length_cm,
         std::optional<std::vector<double>> sigma) {
        FitOptions opts;
        opts.use_weights = sigma.has_value();
        return fit_dict(fit_conversion(make_dataset(pump_mw, eta, sigma), length_cm, opts));
      },
      py::arg("pump_mw"), py::arg("eta_ext"), py::arg("length_cm") = 3.0, py::arg("sigma") = py::none());
  m.def(
      "extract_mu1",
      [](const std::vector<double>& mu, const std::vector<double>& snr_values) {
        return estimate_dict(extract_mu1(make_dataset(mu, snr_values, std::nullopt)));
      },
      py::arg("mu_in"), py::arg("snr"));

  m.def("visibility_model", &visibility_model, py::arg("mu_in"), py::arg("mu1"), py::arg("v0") = 1.0);
  m.def("fidelity_from_visibility", &fidelity_from_visibility, py::arg("visibility"));
  m.def("classical_fidelity_bound", &classical_fidelity_bound, py::arg("mu_in"), py::arg("eta"));
  m.def(
      "slot_statistics",
      [](double phi, double gamma, double mu, double noise, double max_visibility) {
        Interferometer ifm;
        ifm.phase_rad = gamma;
        ifm.max_visibility = max_visibility;
        const SlotCounts s = slot_statistics(TimeBinQubit::make(phi), ifm, mu, noise);
        return py::make_tuple(s.early, s.central, s.late);
      },
      py::arg("phi"), py::arg("gamma"), py::arg("mu") = 1.0, py::arg("noise_per_slot") = 0.0,
      py::arg("max_visibility") = 1.0);

  m.def(
      "run_preset",
      [](const std::string& name, const ScenarioConfig& c) {
        const PresetOutput out = [&] {
          py::gil_scoped_release release;
          return run_preset(name, c);
        }();
        py::dict tables;
        for (const auto& [stem, table] : out.tables) tables[py::str(stem)] = table.str();
        py::dict scalars;
        for (const auto& [k, v] : out.scalars) scalars[py::str(k)] = v;
        return py::make_tuple(tables, scalars);
      },
      py::arg("name"), py::arg("config"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "qfconv");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
