#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pdbal/bench.hpp"

namespace pdbal {

struct RunConfig {
  std::vector<ScenarioConfig> scenarios;
};

// Errors from this module derive from ConfigError so the CLI can map them to
// the usage exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal TOML reader covering the configuration subset: [table] and
// [[array-of-tables]] headers, dotted keys, basic strings, integers, floats,
// booleans, and flat arrays. Produces the same document shape as the JSON
// loader.
nlohmann::json parse_toml_subset(const std::string& text);

// Loads a config document; .toml goes through the TOML reader, everything
// else is parsed as JSON.
nlohmann::json load_config_document(const std::string& path);

// Applies "dotted.path=value" to every scenario entry; the path must
// reference an existing key. Values parse as JSON scalars when possible and
// fall back to strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Validates and materializes the scenario array with all defaults filled in.
RunConfig parse_run_config(const nlohmann::json& doc);

ScenarioConfig parse_scenario(const nlohmann::json& entry);

// The canonical key set with default values; user entries are merged onto it.
nlohmann::json scenario_defaults();

}  // namespace pdbal
