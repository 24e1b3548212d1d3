#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qfconv/config.hpp"
#include "qfconv/csv.hpp"
#include "qfconv/montecarlo.hpp"

namespace qfconv {

std::string_view toolkit_version();

/// One line of the reproduction table: a computed quantity against its
/// accepted range [lo, hi].
struct ReproductionRow {
  int criterion = 0;
  std::string quantity;
  double value = 0;
  double lo = 0;
  double hi = 0;
  std::string reference;
  bool pass = false;
};

struct ReproductionOptions {
  /// Include the sampled checks (fit recovery, Monte Carlo agreement,
  /// histogram shape, determinism); these take seconds rather than milliseconds.
  bool sampled = true;
};

std::vector<ReproductionRow> reproduction_table(const ScenarioConfig& config, const ReproductionOptions& options = {});
CsvTable reproduction_csv(const std::vector<ReproductionRow>& rows);

/// One row per run (signal on, input blocked) with the analytic expectation.
CsvTable simulation_summary(const ExperimentScenario& scenario, const SimulationResult& result);
CsvTable click_table(const SimulationResult& result);

/// Metadata and derived scalars for one CLI invocation. Serialization is
/// deterministic: fixed key order, numbers at 9 significant digits.
struct ReportBundle {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version{toolkit_version()};
  std::vector<std::pair<std::string, std::string>> datasets;  // name -> file
  std::vector<std::pair<std::string, double>> scalars;

  std::string to_json() const;
};

}  // namespace qfconv
