#pragma once

#include <string>
#include <vector>

#include "freqconv/app/config.hpp"

namespace freqconv::app {

/// Names of the built-in scenarios, in display order.
std::vector<std::string> preset_names();

/// Built-in scenario by name; throws ConfigError for unknown names.
ScenarioConfig preset(const std::string& name);

}  // namespace freqconv::app
