#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "freqconv/app/commands.hpp"
#include "freqconv/app/config.hpp"
#include "freqconv/app/presets.hpp"

namespace fs = std::filesystem;
using namespace freqconv::app;

namespace {

enum ExitCode { ok = 0, run_failed = 1, bad_config = 2, not_converged = 3 };

struct Options {
  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string engine;
};

void add_scenario_options(CLI::App* sub, Options& opt) {
  auto* config = sub->add_option("--config", opt.config_path, "scenario INI file")
                     ->check(CLI::ExistingFile);
  sub->add_option("--preset", opt.preset_name, "built-in scenario")->excludes(config);
  sub->add_option("--out", opt.out_dir, "output directory (default: run.output)");
  sub->add_option("--seed", opt.seed, "trajectory seed");
  sub->add_option("--engine", opt.engine, "master_equation | trajectories | langevin");
}

ScenarioConfig resolve(const Options& opt) {
  ScenarioConfig config;
  if (!opt.config_path.empty()) {
    config = load_config(opt.config_path);
  } else if (!opt.preset_name.empty()) {
    config = preset(opt.preset_name);
  } else {
    throw ConfigError("give --config <file> or --preset <name>");
  }
  if (opt.seed) config.run.seed = *opt.seed;
  if (!opt.engine.empty()) config.run.engine = parse_engine(opt.engine);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sideband cooling and state-swap simulator for a resonator coupled to a "
               "damped auxiliary oscillator"};
  app.require_subcommand(1);
  Options opt;

  using Command = RunReport (*)(const ScenarioConfig&, const fs::path&);
  const std::pair<const char*, Command> commands[] = {
      {"cool", cmd_cool},
      {"swap", cmd_swap},
      {"control", cmd_control},
      {"validate-frames", cmd_validate_frames},
      {"sweep", cmd_sweep},
  };
  const char* help[] = {
      "steady-state cooling",
      "single state swap",
      "driven steady state and response",
      "lab frame against interaction picture",
      "steady occupation over a parameter grid",
  };
  Command selected = nullptr;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
    add_scenario_options(sub, opt);
    sub->callback([&selected, fn = commands[i].second] { selected = fn; });
  }

  std::string write_dir;
  CLI::App* list = app.add_subcommand("presets", "list built-in scenarios");
  list->add_option("--write", write_dir, "write each preset as <name>.ini into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list->parsed()) {
      for (const auto& name : preset_names()) {
        fmt::print("{}\n", name);
        if (!write_dir.empty()) {
          fs::create_directories(write_dir);
          write_text(fs::path(write_dir) / (name + ".ini"), to_ini(preset(name)));
        }
      }
      return ok;
    }
    const ScenarioConfig config = resolve(opt);
    const fs::path out = opt.out_dir.empty() ? fs::path(config.run.output) : fs::path(opt.out_dir);
    const RunReport report = selected(config, out);
    fmt::print("{}", report.summary());
    return report.converged() ? ok : not_converged;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return bad_config;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return run_failed;
  }
}
