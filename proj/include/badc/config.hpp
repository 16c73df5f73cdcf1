#pragma once

// JSON experiment configuration. Every section is optional and falls back to
// the defaults of ExperimentConfig; unknown keys are rejected. Errors are
// ConfigError with the dotted path of the offending field.

#include <string>

#include "badc/area_model.hpp"
#include "badc/explorer.hpp"

namespace badc {

// Relative dataset paths resolve against `base_dir`.
ExperimentConfig config_from_json(const std::string& text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

// Canonical echo of the settings that determine results (worker count and
// output directory are left out).
std::string config_to_json(const ExperimentConfig& cfg);

CostTable cost_table_from_json(const std::string& text);
CostTable load_cost_table(const std::string& path);

}  // namespace badc
