#pragma once

#include <filesystem>

#include "elfarol/world.hpp"

namespace elfarol {

// Loads a scenario config file: one `key = value` pair per line, `#` lines
// are comments, keys map one-to-one onto SimConfig. Unknown keys and
// malformed values are ConfigErrors; the result is validated.
SimConfig load_scenario(const std::filesystem::path& path);

// Parses config text directly (file contents without the file).
SimConfig parse_scenario(const std::string& text, const std::string& origin = "<config>");

}  // namespace elfarol
