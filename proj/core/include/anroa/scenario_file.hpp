#pragma once

#include "anroa/plant_sim.hpp"

#include <string>
#include <string_view>

namespace anroa::io {

/// Parses a YAML scenario. Missing keys keep their defaults; unknown keys,
/// wrong types and YAML syntax errors throw ConfigError naming the field path
/// and the line. The result is validated. `origin` prefixes error messages and
/// anchors a relative mppt.anfis_file.
sim::ScenarioConfig parse_scenario(std::string_view text, const std::string& origin = "<scenario>");

/// Reads and parses a scenario file. Throws ConfigError if it cannot be read.
sim::ScenarioConfig load_scenario(const std::string& path);

/// The configuration written back as YAML (round-trips through parse_scenario).
std::string dump_scenario(const sim::ScenarioConfig& cfg);

} // namespace anroa::io
