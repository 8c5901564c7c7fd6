#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibvs/scenario.hpp"

namespace ibvs {

using ConfigTree = nlohmann::ordered_json;

/// Parses the TOML subset used by scenario files: [dotted.tables], bare or
/// dotted keys, strings, booleans, integers, floats (incl. inf/nan) and
/// possibly nested, possibly multi-line arrays. Comments start with '#'.
/// Inline tables and arrays of tables are rejected.
ConfigTree parse_toml(std::string_view text);

/// Inverse of parse_toml for trees of tables, scalars and arrays.
std::string to_toml(const ConfigTree& tree);

/// Strict: unknown keys, wrong types and invalid values raise ConfigError.
ScenarioConfig scenario_from_tree(const ConfigTree& tree);
ConfigTree scenario_to_tree(const ScenarioConfig& config);

/// Reads TOML, or JSON when the file starts with '{' or ends in .json.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(std::string_view text, bool json);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ScenarioConfig preset(std::string_view name);

}  // namespace ibvs
