#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "greenwave/scenario.hpp"

namespace greenwave {

/// Reads and validates a JSON scenario file. Syntax errors report line and
/// column; schema errors name the offending field path.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(std::string_view text, std::string_view origin = "<scenario>");

/// Canonical JSON rendering (round-trips through parse_scenario_text).
std::string scenario_to_json(const Scenario& scenario);

}  // namespace greenwave
