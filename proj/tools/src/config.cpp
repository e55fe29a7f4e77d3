#include "freqconv/app/config.hpp"

#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace freqconv::app {

const char* to_string(Engine engine) {
  switch (engine) {
    case Engine::master_equation: return "master_equation";
    case Engine::trajectories: return "trajectories";
    case Engine::langevin: return "langevin";
  }
  return "?";
}

Engine parse_engine(const std::string& name) {
  if (name == "master_equation") return Engine::master_equation;
  if (name == "trajectories") return Engine::trajectories;
  if (name == "langevin") return Engine::langevin;
  throw ConfigError("unknown engine '" + name +
                    "' (expected master_equation, trajectories or langevin)");
}

const char* to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::thermal: return "thermal";
    case InitialKind::fock: return "fock";
    case InitialKind::rwa_steady: return "rwa_steady";
  }
  return "?";
}

namespace {

InitialKind parse_initial(const std::string& name) {
  if (name == "thermal") return InitialKind::thermal;
  if (name == "fock") return InitialKind::fock;
  if (name == "rwa_steady") return InitialKind::rwa_steady;
  throw ConfigError("unknown initial state '" + name + "' (expected thermal, fock or rwa_steady)");
}

Unraveling parse_unraveling(const std::string& name) {
  if (name == "jumps") return Unraveling::jumps;
  if (name == "diffusion") return Unraveling::diffusion;
  throw ConfigError("unknown unraveling '" + name + "' (expected jumps or diffusion)");
}

double parse_double(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || text.find_first_not_of(" \t", used) != std::string::npos) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return value;
}

long long parse_integer(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || text.find_first_not_of(" \t", used) != std::string::npos) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, text));
  }
  return value;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(parse_double(item, key));
  if (values.empty()) throw ConfigError(key + ": empty list");
  return values;
}

int to_int(long long v, const std::string& key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": out of range");
  }
  return static_cast<int>(v);
}

void assign_mode(ModeConfig& mode, const std::string& key, const std::string& value,
                 const std::string& where) {
  if (key == "frequency_hz") {
    mode.frequency_hz = parse_double(value, where);
  } else if (key == "q") {
    mode.quality_factor = parse_double(value, where);
  } else if (key == "damping_per_s") {
    mode.damping_per_s = parse_double(value, where);
  } else if (key == "temperature_k") {
    mode.temperature_k = parse_double(value, where);
  } else if (key == "n_occ") {
    mode.n_occ = parse_double(value, where);
  } else if (key == "truncation") {
    mode.truncation = to_int(parse_integer(value, where), where);
  } else {
    throw ConfigError("unknown key '" + where + "'");
  }
}

/// Applies one `section.key = value` pair.
void assign(ScenarioConfig& c, const std::string& section, const std::string& key,
            const std::string& value) {
  const std::string where = section + "." + key;
  if (section == "target") {
    assign_mode(c.target, key, value, where);
  } else if (section == "aux") {
    assign_mode(c.aux, key, value, where);
  } else if (section == "coupling") {
    if (key == "g_per_s") {
      c.coupling.g_per_s = parse_double(value, where);
    } else if (key == "frame") {
      try {
        c.coupling.frame = parse_frame(value);
      } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
      }
    } else if (key == "modulation_hz") {
      c.coupling.modulation_hz = parse_double(value, where);
    } else {
      throw ConfigError("unknown key '" + where + "'");
    }
  } else if (section == "drive") {
    if (key == "beta_re") {
      c.drive.beta_re = parse_double(value, where);
    } else if (key == "beta_im") {
      c.drive.beta_im = parse_double(value, where);
    } else if (key == "power_w") {
      c.drive.power_w = parse_double(value, where);
    } else if (key == "phase_rad") {
      c.drive.phase_rad = parse_double(value, where);
    } else {
      throw ConfigError("unknown key '" + where + "'");
    }
  } else if (section == "run") {
    RunConfig& r = c.run;
    if (key == "name") {
      c.name = value;
    } else if (key == "engine") {
      r.engine = parse_engine(value);
    } else if (key == "t_final_s") {
      r.t_final_s = parse_double(value, where);
    } else if (key == "dt_s") {
      r.dt_s = parse_double(value, where);
    } else if (key == "tolerance") {
      r.tolerance = parse_double(value, where);
    } else if (key == "samples") {
      r.samples = to_int(parse_integer(value, where), where);
    } else if (key == "trajectories") {
      r.trajectories = to_int(parse_integer(value, where), where);
    } else if (key == "seed") {
      const long long seed = parse_integer(value, where);
      if (seed < 0) throw ConfigError(where + ": must be >= 0");
      r.seed = static_cast<std::uint64_t>(seed);
    } else if (key == "threads") {
      r.threads = to_int(parse_integer(value, where), where);
    } else if (key == "unraveling") {
      r.unraveling = parse_unraveling(value);
    } else if (key == "initial") {
      r.initial = parse_initial(value);
    } else if (key == "initial_target_n") {
      r.initial_target_n = to_int(parse_integer(value, where), where);
    } else if (key == "initial_aux_n") {
      r.initial_aux_n = to_int(parse_integer(value, where), where);
    } else if (key == "output") {
      r.output = value;
    } else {
      throw ConfigError("unknown key '" + where + "'");
    }
  } else if (section == "sweep") {
    auto axis = [&c](std::size_t i) -> SweepAxis& {
      if (c.sweep.axes.size() <= i) c.sweep.axes.resize(i + 1);
      return c.sweep.axes[i];
    };
    if (key == "parameter") {
      axis(0).parameter = value;
    } else if (key == "values") {
      axis(0).values = parse_list(value, where);
    } else if (key == "parameter2") {
      axis(1).parameter = value;
    } else if (key == "values2") {
      axis(1).values = parse_list(value, where);
    } else if (key == "max_points") {
      c.sweep.max_points = to_int(parse_integer(value, where), where);
    } else {
      throw ConfigError("unknown key '" + where + "'");
    }
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

// Shortest text that reads back to the same double.
std::string number(double v) { return fmt::format("{}", v); }

void write_mode(std::ostream& out, const char* section, const ModeConfig& m) {
  out << '[' << section << "]\n";
  out << "frequency_hz = " << number(m.frequency_hz) << '\n';
  if (m.quality_factor) out << "q = " << number(*m.quality_factor) << '\n';
  if (m.damping_per_s) out << "damping_per_s = " << number(*m.damping_per_s) << '\n';
  if (m.temperature_k) out << "temperature_k = " << number(*m.temperature_k) << '\n';
  if (m.n_occ) out << "n_occ = " << number(*m.n_occ) << '\n';
  out << "truncation = " << m.truncation << "\n\n";
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void validate_mode(const ModeConfig& m, const std::string& s) {
  require(m.frequency_hz > 0.0, s + ".frequency_hz must be > 0");
  require(m.quality_factor.has_value() != m.damping_per_s.has_value(),
          s + ": give exactly one of q and damping_per_s");
  if (m.quality_factor) require(*m.quality_factor > 0.0, s + ".q must be > 0");
  if (m.damping_per_s) require(*m.damping_per_s >= 0.0, s + ".damping_per_s must be >= 0");
  require(!(m.temperature_k && m.n_occ), s + ": give at most one of temperature_k and n_occ");
  if (m.temperature_k) require(*m.temperature_k >= 0.0, s + ".temperature_k must be >= 0");
  if (m.n_occ) require(*m.n_occ >= 0.0, s + ".n_occ must be >= 0");
  require(m.truncation >= 2 && m.truncation <= 256, s + ".truncation must be in [2, 256]");
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ScenarioConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(source + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      try {
        assign(config, section, key, value.get_value<std::string>());
      } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
      }
    }
  }
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

std::string to_ini(const ScenarioConfig& c) {
  std::ostringstream out;
  write_mode(out, "target", c.target);
  write_mode(out, "aux", c.aux);
  out << "[coupling]\ng_per_s = " << number(c.coupling.g_per_s) << '\n'
      << "frame = " << to_string(c.coupling.frame) << '\n';
  if (c.coupling.modulation_hz) out << "modulation_hz = " << number(*c.coupling.modulation_hz) << '\n';
  out << '\n';
  if (c.drive.present()) {
    out << "[drive]\n";
    if (c.drive.beta_re) out << "beta_re = " << number(*c.drive.beta_re) << '\n';
    if (c.drive.beta_im) out << "beta_im = " << number(*c.drive.beta_im) << '\n';
    if (c.drive.power_w) out << "power_w = " << number(*c.drive.power_w) << '\n';
    out << "phase_rad = " << number(c.drive.phase_rad) << "\n\n";
  }
  const RunConfig& r = c.run;
  out << "[run]\nname = " << c.name << '\n'
      << "engine = " << to_string(r.engine) << '\n';
  if (r.t_final_s) out << "t_final_s = " << number(*r.t_final_s) << '\n';
  if (r.dt_s) out << "dt_s = " << number(*r.dt_s) << '\n';
  out << "tolerance = " << number(r.tolerance) << '\n'
      << "samples = " << r.samples << '\n'
      << "trajectories = " << r.trajectories << '\n'
      << "seed = " << r.seed << '\n'
      << "threads = " << r.threads << '\n'
      << "unraveling = " << to_string(r.unraveling) << '\n'
      << "initial = " << to_string(r.initial) << '\n'
      << "initial_target_n = " << r.initial_target_n << '\n'
      << "initial_aux_n = " << r.initial_aux_n << '\n'
      << "output = " << r.output << '\n';
  if (!c.sweep.axes.empty()) {
    out << "\n[sweep]\n";
    for (std::size_t i = 0; i < c.sweep.axes.size(); ++i) {
      const std::string suffix = i == 0 ? "" : "2";
      out << "parameter" << suffix << " = " << c.sweep.axes[i].parameter << '\n'
          << "values" << suffix << " = ";
      for (std::size_t k = 0; k < c.sweep.axes[i].values.size(); ++k) {
        out << (k ? "," : "") << number(c.sweep.axes[i].values[k]);
      }
      out << '\n';
    }
    out << "max_points = " << c.sweep.max_points << '\n';
  }
  return out.str();
}

void set_parameter(ScenarioConfig& config, const std::string& key, double value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("parameter '" + key + "' is not section.key");
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);
  static const char* const textual[] = {"frame", "engine", "unraveling", "initial", "output",
                                        "name"};
  for (const char* t : textual) {
    if (name == t) throw ConfigError("parameter '" + key + "' is not numeric");
  }
  const bool integral = name == "truncation" || name == "samples" || name == "trajectories" ||
                        name == "seed" || name == "threads" || name == "initial_target_n" ||
                        name == "initial_aux_n";
  if (integral && value != std::floor(value)) {
    throw ConfigError("parameter '" + key + "' needs an integer value");
  }
  assign(config, section, name, integral ? fmt::format("{}", static_cast<long long>(value))
                                          : number(value));
  // Keep the exclusive pairs consistent with the override.
  ModeConfig* mode = section == "target" ? &config.target
                     : section == "aux"  ? &config.aux
                                         : nullptr;
  if (mode) {
    if (name == "q") mode->damping_per_s.reset();
    if (name == "damping_per_s") mode->quality_factor.reset();
    if (name == "temperature_k") mode->n_occ.reset();
    if (name == "n_occ") mode->temperature_k.reset();
  }
  if (section == "drive" && (name == "beta_re" || name == "beta_im")) config.drive.power_w.reset();
  if (section == "drive" && name == "power_w") {
    config.drive.beta_re.reset();
    config.drive.beta_im.reset();
  }
}

void validate(const ScenarioConfig& c) {
  validate_mode(c.target, "target");
  validate_mode(c.aux, "aux");
  require(c.coupling.g_per_s >= 0.0, "coupling.g_per_s must be >= 0");
  if (c.coupling.modulation_hz) {
    require(c.coupling.frame == Frame::lab_modulated,
            "coupling.modulation_hz applies to frame = lab_modulated only");
  }
  if (c.coupling.frame == Frame::lab_modulated) {
    require(c.aux.frequency_hz > c.target.frequency_hz,
            "lab_modulated frame needs aux.frequency_hz > target.frequency_hz");
  }
  require(!(c.drive.power_w && (c.drive.beta_re || c.drive.beta_im)),
          "drive: give either beta_re/beta_im or power_w");
  if (c.drive.power_w) require(*c.drive.power_w >= 0.0, "drive.power_w must be >= 0");

  const RunConfig& r = c.run;
  if (r.t_final_s) require(*r.t_final_s > 0.0, "run.t_final_s must be > 0");
  if (r.dt_s) require(*r.dt_s > 0.0, "run.dt_s must be > 0");
  require(r.tolerance > 0.0, "run.tolerance must be > 0");
  require(r.samples >= 3, "run.samples must be >= 3");
  require(r.trajectories >= 1, "run.trajectories must be >= 1");
  require(r.threads >= 0, "run.threads must be >= 0");
  require(r.initial_target_n >= 0 && r.initial_target_n < c.target.truncation,
          "run.initial_target_n must lie inside the target truncation");
  require(r.initial_aux_n >= 0 && r.initial_aux_n < c.aux.truncation,
          "run.initial_aux_n must lie inside the aux truncation");
  if (r.engine == Engine::langevin) {
    require(c.coupling.frame == Frame::interaction_rwa,
            "engine = langevin is linear RWA theory; set coupling.frame = interaction_rwa");
  }
  if (r.engine == Engine::master_equation) {
    const long long joint = static_cast<long long>(c.target.truncation) * c.aux.truncation;
    require(joint <= 2500, fmt::format("master_equation engine: joint dimension {} exceeds 2500 "
                                       "(density matrix memory); reduce truncation",
                                       joint));
  }

  require(c.sweep.axes.size() <= 2, "sweep: at most two parameters");
  long long points = 1;
  for (const auto& axis : c.sweep.axes) {
    require(!axis.parameter.empty(), "sweep: values given without a parameter");
    require(!axis.values.empty(), "sweep." + axis.parameter + ": no values");
    ScenarioConfig probe = c;
    set_parameter(probe, axis.parameter, axis.values.front());
    points *= static_cast<long long>(axis.values.size());
  }
  require(c.sweep.max_points >= 1, "sweep.max_points must be >= 1");
  require(points <= c.sweep.max_points,
          fmt::format("sweep: {} grid points exceed max_points = {}", points, c.sweep.max_points));
}

ModeParams resolve_mode(const ModeConfig& m) {
  ModeParams p;
  p.angular_frequency = 2.0 * constants::pi * m.frequency_hz;
  p.damping_rate = m.quality_factor ? p.angular_frequency / *m.quality_factor
                                    : m.damping_per_s.value_or(0.0);
  if (m.temperature_k) {
    p.bath = Temperature{*m.temperature_k};
  } else {
    p.bath = Occupation{m.n_occ.value_or(0.0)};
  }
  p.truncation = m.truncation;
  return p;
}

DriveParams resolve_drive(const ScenarioConfig& c) {
  if (c.drive.power_w) {
    return DriveParams::from_power(*c.drive.power_w, 2.0 * constants::pi * c.aux.frequency_hz,
                                   c.drive.phase_rad);
  }
  const Complex beta(c.drive.beta_re.value_or(0.0), c.drive.beta_im.value_or(0.0));
  return DriveParams{beta * std::polar(1.0, c.drive.phase_rad)};
}

CouplingParams resolve_coupling(const ScenarioConfig& c) {
  CouplingParams p;
  p.g = c.coupling.g_per_s;
  p.frame = c.coupling.frame;
  if (c.coupling.modulation_hz) p.modulation_frequency = 2.0 * constants::pi * *c.coupling.modulation_hz;
  return p;
}

SystemModel build_model(const ScenarioConfig& config) {
  return build_model(config, config.coupling.frame);
}

SystemModel build_model(const ScenarioConfig& config, Frame frame) {
  CouplingParams coupling = resolve_coupling(config);
  coupling.frame = frame;
  if (frame != Frame::lab_modulated) coupling.modulation_frequency.reset();
  return SystemModel(resolve_mode(config.target), resolve_mode(config.aux), coupling,
                     resolve_drive(config));
}

}  // namespace freqconv::app
