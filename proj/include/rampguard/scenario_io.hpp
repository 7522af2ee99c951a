#pragma once

#include <filesystem>
#include <string>

#include "rampguard/scenario.hpp"

namespace rampguard {

// Scenario files are YAML with a mandatory `units` block. Every dimensional
// value is read in the declared unit and converted to SI; see README for the
// key reference. Relative certificate paths resolve against `base_dir`.

Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<scenario>",
                             const std::filesystem::path& base_dir = {});

Scenario parse_scenario(const std::filesystem::path& path);

}  // namespace rampguard
