#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "semiswitch/config.hpp"

namespace semiswitch {

// Runs the configured experiment, writes its artifacts and report.json into out_dir, returns the report.
nlohmann::json run_experiment(const ScenarioConfig& cfg, const std::string& out_dir);

nlohmann::json to_json(const HybridState& z);

}  // namespace semiswitch
