#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "semiswitch/scenarios.hpp"

namespace semiswitch {

struct RunSpec {
  std::uint64_t seed = 1;
  std::optional<double> t_end;
  std::optional<std::size_t> replicas;
  int threads = 1;
  double dt = 0.01;
  std::string format = "csv";
};

struct ScenarioConfig {
  Scenario scenario;
  std::string experiment;
  // Experiment parameters as given; read by the experiment runner with defaults.
  nlohmann::json params = nlohmann::json::object();
  RunSpec run;
  std::optional<LVParams> lv;
};

// Parses a JSON document; errors carry the JSON path or the line and column.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
// A builtin name with its default experiment.
ScenarioConfig builtin_config(const std::string& name);
// Builtin name or path to a config file.
ScenarioConfig resolve_config(const std::string& spec);

}  // namespace semiswitch
