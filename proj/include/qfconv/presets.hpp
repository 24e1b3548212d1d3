#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qfconv/config.hpp"
#include "qfconv/csv.hpp"

namespace qfconv {

struct PresetOutput {
  std::string name;
  /// (file stem, table); the first table is the preset's main dataset.
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, double>> scalars;
};

/// fig3a, fig3b, fig4a, fig5a.
const std::vector<std::string>& preset_names();
bool is_preset(std::string_view name);

/// Throws ValidationError for an unknown name.
PresetOutput run_preset(std::string_view name, const ScenarioConfig& config);

}  // namespace qfconv
