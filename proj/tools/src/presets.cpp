#include "freqconv/app/presets.hpp"

#include <functional>
#include <map>

#include "freqconv/model.hpp"

namespace freqconv::app {

namespace {

constexpr double kTargetHz = 20e6;
constexpr double kAuxHz = 5e9;
constexpr double kKappa = 1e6;
constexpr double kNTarget = 3.68;

/// ω/ratio for the 20 MHz target.
double coupling_over(double ratio) { return 2.0 * constants::pi * kTargetHz / ratio; }

ScenarioConfig base(const std::string& name, double q, Frame frame) {
  ScenarioConfig c;
  c.name = name;
  c.target.frequency_hz = kTargetHz;
  c.target.quality_factor = q;
  c.target.n_occ = kNTarget;
  c.target.truncation = 32;
  c.aux.frequency_hz = kAuxHz;
  c.aux.damping_per_s = kKappa;
  c.aux.temperature_k = 0.02;
  c.aux.truncation = 32;
  c.coupling.g_per_s = coupling_over(20.0 * constants::pi);
  c.coupling.frame = frame;
  return c;
}

ScenarioConfig swap(const std::string& name, double n0) {
  ScenarioConfig c = base(name, 1e5, Frame::interaction_full);
  c.target.n_occ = n0;
  return c;
}

ScenarioConfig g40pi(const std::string& name, Frame frame) {
  ScenarioConfig c = base(name, 5e5, frame);
  c.coupling.g_per_s = coupling_over(40.0 * constants::pi);
  return c;
}

ScenarioConfig swap_ideal() {
  ScenarioConfig c = base("swap-ideal", 1e5, Frame::interaction_rwa);
  c.target.quality_factor.reset();
  c.target.damping_per_s = 0.0;
  c.target.truncation = 4;
  c.aux.damping_per_s = 0.0;
  c.aux.truncation = 4;
  c.run.initial = InitialKind::fock;
  c.run.initial_target_n = 1;
  return c;
}

ScenarioConfig control() {
  ScenarioConfig c = base("control", 1e5, Frame::interaction_rwa);
  c.coupling.g_per_s = 2e5;
  c.target.truncation = 32;
  c.aux.truncation = 6;
  c.drive.beta_re = 200.0;
  c.drive.beta_im = 0.0;
  return c;
}

ScenarioConfig validate_frames() {
  ScenarioConfig c = base("validate-frames", 1e5, Frame::interaction_full);
  c.aux.frequency_hz = 10.0 * kTargetHz;
  c.aux.damping_per_s = 5e5;
  c.aux.temperature_k.reset();
  c.aux.n_occ = 0.0;
  c.target.n_occ = 1.0;
  c.target.truncation = 12;
  c.aux.truncation = 12;
  c.coupling.g_per_s = coupling_over(40.0 * constants::pi);
  return c;
}

ScenarioConfig mcwf16() {
  ScenarioConfig c = base("mcwf-16", 1e5, Frame::interaction_rwa);
  c.target.n_occ = 2.0;
  c.target.truncation = 16;
  c.aux.truncation = 16;
  c.run.engine = Engine::trajectories;
  c.run.t_final_s = 3e-6;
  c.run.samples = 201;
  return c;
}

ScenarioConfig langevin_q1e5() {
  ScenarioConfig c = base("langevin-q1e5", 1e5, Frame::interaction_rwa);
  c.run.engine = Engine::langevin;
  return c;
}

ScenarioConfig sweep_q() {
  ScenarioConfig c = base("sweep-q", 1e5, Frame::interaction_rwa);
  c.sweep.axes.push_back(SweepAxis{"target.q", {1e4, 1e5, 5e5}});
  return c;
}

using Factory = std::function<ScenarioConfig()>;

const std::vector<std::pair<std::string, Factory>>& registry() {
  static const std::vector<std::pair<std::string, Factory>> table = [] {
    std::vector<std::pair<std::string, Factory>> t;
    for (const auto& [tag, q] :
         {std::pair{"q1e4", 1e4}, std::pair{"q1e5", 1e5}, std::pair{"q5e5", 5e5}}) {
      for (const auto& [suffix, frame] : {std::pair{"rwa", Frame::interaction_rwa},
                                          std::pair{"full", Frame::interaction_full}}) {
        const std::string name = std::string("cool-") + tag + "-" + suffix;
        t.emplace_back(name, [name, q = q, frame = frame] { return base(name, q, frame); });
      }
    }
    t.emplace_back("cool-q5e5-rwa-g40pi",
                   [] { return g40pi("cool-q5e5-rwa-g40pi", Frame::interaction_rwa); });
    t.emplace_back("cool-q5e5-full-g40pi",
                   [] { return g40pi("cool-q5e5-full-g40pi", Frame::interaction_full); });
    t.emplace_back("swap-n3.68", [] { return swap("swap-n3.68", 3.68); });
    t.emplace_back("swap-n20", [] { return swap("swap-n20", 20.0); });
    t.emplace_back("swap-ideal", swap_ideal);
    t.emplace_back("control", control);
    t.emplace_back("validate-frames", validate_frames);
    t.emplace_back("mcwf-16", mcwf16);
    t.emplace_back("langevin-q1e5", langevin_q1e5);
    t.emplace_back("sweep-q", sweep_q);
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

ScenarioConfig preset(const std::string& name) {
  for (const auto& [key, factory] : registry()) {
    if (key == name) return factory();
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "'; known presets: " + known);
}

}  // namespace freqconv::app
