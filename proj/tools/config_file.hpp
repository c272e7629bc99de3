#pragma once

// Flat key-value experiment files:
//
//   [rotation]
//   theta_deg = 5
//   steps = 288      # comments start with '#' or ';'
//
// Sections and keys are fixed; anything else is rejected so that a typo
// never silently falls back to a default.

#include <istream>
#include <map>
#include <string>

namespace plab::cli {

// section -> key -> raw value
using ConfigValues = std::map<std::string, std::map<std::string, std::string>>;

// Throws ConfigError with the offending line number.
ConfigValues parse_config(std::istream& in);

// Reads and parses a file. Throws ConfigError, or std::ios_base::failure when
// the file cannot be opened.
ConfigValues load_config(const std::string& path);

// Keys accepted in each section, as they appear in the file.
const std::map<std::string, std::map<std::string, std::string>>& config_schema();

}  // namespace plab::cli
