#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqconv/mcwf.hpp"
#include "freqconv/model.hpp"

namespace freqconv::app {

enum class Engine { master_equation, trajectories, langevin };

const char* to_string(Engine engine);
Engine parse_engine(const std::string& name);

/// Initial state of a run.
///   thermal     product of each mode's bath thermal state
///   fock        |initial_target_n, initial_aux_n⟩
///   rwa_steady  stationary state of the same model with the RWA coupling
enum class InitialKind { thermal, fock, rwa_steady };

const char* to_string(InitialKind kind);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModeConfig {
  double frequency_hz = 0.0;
  /// Exactly one of quality_factor and damping_per_s.
  std::optional<double> quality_factor;
  std::optional<double> damping_per_s;
  /// At most one of temperature_k and n_occ; neither means n_occ = 0.
  std::optional<double> temperature_k;
  std::optional<double> n_occ;
  int truncation = 2;
};

struct CouplingConfig {
  double g_per_s = 0.0;
  Frame frame = Frame::interaction_rwa;
  std::optional<double> modulation_hz;
};

struct DriveConfig {
  /// β in s^(-1/2); exclusive with power_w.
  std::optional<double> beta_re;
  std::optional<double> beta_im;
  std::optional<double> power_w;
  double phase_rad = 0.0;

  bool present() const { return beta_re || beta_im || power_w; }
};

struct RunConfig {
  Engine engine = Engine::master_equation;
  std::optional<double> t_final_s;
  std::optional<double> dt_s;
  /// Relative step-refinement tolerance of the master-equation integrator.
  double tolerance = 1e-6;
  int samples = 401;
  int trajectories = 4096;
  std::uint64_t seed = 1;
  int threads = 0;
  Unraveling unraveling = Unraveling::jumps;
  InitialKind initial = InitialKind::thermal;
  int initial_target_n = 0;
  int initial_aux_n = 0;
  std::string output = "out";
};

struct SweepAxis {
  std::string parameter;
  std::vector<double> values;
};

struct SweepConfig {
  std::vector<SweepAxis> axes;  ///< one or two
  int max_points = 64;
};

struct ScenarioConfig {
  std::string name = "custom";
  ModeConfig target;
  ModeConfig aux;
  CouplingConfig coupling;
  DriveConfig drive;
  RunConfig run;
  SweepConfig sweep;
};

/// Parses INI text with sections [target] [aux] [coupling] [drive] [run]
/// [sweep]. Unknown sections or keys are rejected. Does not validate.
ScenarioConfig parse_config(std::istream& in, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// INI text that parse_config() maps back to the same configuration.
std::string to_ini(const ScenarioConfig& config);

/// Checks ranges and exclusivity; throws ConfigError.
void validate(const ScenarioConfig& config);

/// Overrides one numeric key addressed as "section.key", e.g. "target.q".
void set_parameter(ScenarioConfig& config, const std::string& key, double value);

ModeParams resolve_mode(const ModeConfig& mode);
DriveParams resolve_drive(const ScenarioConfig& config);
CouplingParams resolve_coupling(const ScenarioConfig& config);

/// The model a configuration describes, in its configured frame.
SystemModel build_model(const ScenarioConfig& config);
/// Same model with the coupling frame replaced.
SystemModel build_model(const ScenarioConfig& config, Frame frame);

}  // namespace freqconv::app
