#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>

#include "freqconv/app/config.hpp"
#include "freqconv/app/report.hpp"

namespace freqconv::app {

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Steady-state cooling: time series to t_final plus the stationary
/// ⟨n_target⟩, the simple estimate γ n_T/(γ+κ) and their ratio.
RunReport cmd_cool(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Single state swap: swap time and depth of the first minimum of ⟨n_target⟩.
RunReport cmd_swap(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Driven steady state: ⟨a⟩_ss against the linear-response values, the
/// |⟨a⟩_ss|² + ⟨n⟩_c decomposition and the response settling time.
RunReport cmd_control(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Lab frame with modulated coupling against the interaction picture.
RunReport cmd_validate_frames(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Steady ⟨n_target⟩ over a one- or two-parameter grid, one CSV row per
/// point in row-major grid order.
RunReport cmd_sweep(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Default durations.
double default_cool_time(const ScenarioConfig& config);
double default_swap_time(const ScenarioConfig& config);

/// Resolved parameters with unit conversions, one `key = value` per line.
std::string parameter_echo(const ScenarioConfig& config);

}  // namespace freqconv::app
