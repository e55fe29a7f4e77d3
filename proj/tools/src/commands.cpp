#include "freqconv/app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "freqconv/app/analysis.hpp"
#include "freqconv/langevin.hpp"
#include "freqconv/lindblad.hpp"
#include "freqconv/mcwf.hpp"

namespace freqconv::app {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSeriesFile = "timeseries.csv";

LinearModel linear_model(const SystemModel& m) {
  return LinearModel{m.target().damping_rate, m.aux().damping_rate, m.coupling().g,
                     m.target_occupation(), m.aux_occupation(), m.drive().beta};
}

LinearModel linear_model(const ScenarioConfig& c) {
  const ModeParams target = resolve_mode(c.target);
  const ModeParams aux = resolve_mode(c.aux);
  return LinearModel{target.damping_rate, aux.damping_rate, c.coupling.g_per_s,
                     target.occupation(), aux.occupation(), resolve_drive(c).beta};
}

struct Initial {
  std::optional<DensityOperator> rho;
  std::optional<InitialCondition> ket;
  Eigen::Matrix2cd fluctuations = Eigen::Matrix2cd::Zero();
  Eigen::Vector2cd mean = Eigen::Vector2cd::Zero();
  double n_target = 0.0;  ///< initial ⟨n_target⟩ as represented (truncated)
  double n_nominal = 0.0;
  bool under_truncated = false;
  std::vector<std::string> warnings;
};

Initial make_initial(const ScenarioConfig& config, const SystemModel& model) {
  const RunConfig& run = config.run;
  const FockSpace& space = model.space();
  Initial init;
  switch (run.initial) {
    case InitialKind::thermal: {
      init.n_nominal = model.target_occupation();
      if (run.engine == Engine::langevin) {
        init.fluctuations(0, 0) = model.target_occupation();
        init.fluctuations(1, 1) = model.aux_occupation();
        init.n_target = init.n_nominal;
        break;
      }
      const ThermalFactor ta = thermal_state(space, Mode::target, model.target_occupation());
      const ThermalFactor tb = thermal_state(space, Mode::aux, model.aux_occupation());
      init.n_target = ta.truncated_mean;
      init.under_truncated = ta.under_truncated;
      if (!ta.warning.empty()) init.warnings.push_back(ta.warning);
      if (!tb.warning.empty()) init.warnings.push_back(tb.warning);
      if (run.engine == Engine::master_equation) {
        init.rho = product_state(space, ta.rho, tb.rho);
      } else {
        init.ket = ThermalSpec{model.target_occupation(), model.aux_occupation()};
      }
      break;
    }
    case InitialKind::fock: {
      init.n_target = init.n_nominal = run.initial_target_n;
      init.fluctuations(0, 0) = run.initial_target_n;
      init.fluctuations(1, 1) = run.initial_aux_n;
      const JointState psi = JointState::fock(space, run.initial_target_n, run.initial_aux_n);
      if (run.engine == Engine::master_equation) init.rho = DensityOperator::from_pure(psi);
      if (run.engine == Engine::trajectories) init.ket = psi;
      break;
    }
    case InitialKind::rwa_steady: {
      if (run.engine == Engine::trajectories) {
        throw ConfigError("initial = rwa_steady is not Fock-diagonal; use the master_equation "
                          "or langevin engine");
      }
      if (run.engine == Engine::langevin) {
        const SecondMoments m = steady_covariance(linear_model(model));
        init.fluctuations = m.fluctuations;
        init.mean = m.mean;
        init.n_target = init.n_nominal = m.n_target;
        break;
      }
      const SystemModel rwa = build_model(config, Frame::interaction_rwa);
      SteadyState ss = steady_state(rwa);
      init.n_target = init.n_nominal = expectation(ss.state, rwa.n_target()).real();
      init.rho = std::move(ss.state);
      break;
    }
  }
  return init;
}

struct Simulation {
  ObservableSeries series;
  std::optional<std::vector<double>> sem;
  double dt = 0.0;
  int refinements = 0;
};

Simulation simulate(const ScenarioConfig& config, const SystemModel& model,
                    const Initial& init, double t_final) {
  const RunConfig& run = config.run;
  Simulation sim;
  switch (run.engine) {
    case Engine::master_equation: {
      PropagationOptions options;
      options.dt = run.dt_s;
      options.refine_tolerance = run.tolerance;
      options.samples = run.samples;
      PropagationResult r = propagate(model, *init.rho, t_final, options);
      sim.series = std::move(r.observables);
      sim.dt = r.dt;
      sim.refinements = r.refinements;
      break;
    }
    case Engine::trajectories: {
      TrajectoryConfig tc;
      tc.n_trajectories = run.trajectories;
      tc.seed = run.seed;
      tc.t_final = t_final;
      tc.samples = run.samples;
      tc.dt = run.dt_s;
      tc.threads = run.threads;
      tc.unraveling = run.unraveling;
      EnsembleResult r = run_ensemble(model, *init.ket, tc);
      sim.series = std::move(r.mean);
      sim.sem = std::move(r.sem_n_target);
      sim.dt = r.dt;
      break;
    }
    case Engine::langevin: {
      const LinearModel lin = linear_model(model);
      for (int s = 0; s < run.samples; ++s) {
        const double t = s + 1 == run.samples ? t_final : t_final * s / (run.samples - 1);
        const SecondMoments m = moments_at(lin, init.fluctuations, init.mean, t);
        sim.series.times.push_back(t);
        sim.series.n_target.push_back(m.n_target);
        sim.series.n_aux.push_back(m.n_aux);
        sim.series.a.push_back(m.mean(0));
        sim.series.b.push_back(m.mean(1));
        sim.series.trace.push_back(1.0);
      }
      break;
    }
  }
  return sim;
}

fs::path prepare(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  return out_dir;
}

void write_common(const ScenarioConfig& config, const fs::path& dir, RunReport& report) {
  write_text(dir / "parameters.txt", parameter_echo(config));
  write_text(dir / "config.ini", to_ini(config));
  report.add_file(dir / "parameters.txt");
  report.add_file(dir / "config.ini");
}

void finish(const fs::path& dir, RunReport& report) {
  write_text(dir / "summary.txt", report.summary());
  report.add_file(dir / "summary.txt");
}

void record_run(RunReport& report, const ScenarioConfig& config, const SystemModel& model,
                const Initial& init, const Simulation& sim, double t_final) {
  report.add("scenario", config.name);
  report.add("engine", to_string(config.run.engine));
  report.add("frame", to_string(model.frame()));
  report.add("t_final_s", t_final);
  report.add("dt_s", sim.dt);
  if (config.run.engine == Engine::master_equation) report.add("step_refinements", sim.refinements);
  if (config.run.engine == Engine::trajectories) {
    report.add("trajectories", config.run.trajectories);
    report.add("seed", static_cast<double>(config.run.seed));
    report.add("unraveling", to_string(config.run.unraveling));
  }
  report.add("initial", to_string(config.run.initial));
  report.add("n0_target", init.n_target);
  report.add("n0_target_nominal", init.n_nominal);
  for (const auto& w : init.warnings) report.warn(w);
  for (const auto& w : model.warnings()) report.warn(w);
}

/// Stationary ⟨n_target⟩ of a configuration without a time series, for sweeps.
struct SteadyMetric {
  double n_target;
  std::string method;
  bool stationary;
};

SteadyMetric steady_metric(const ScenarioConfig& config) {
  const RunConfig& run = config.run;
  if (run.engine == Engine::langevin) {
    return {steady_covariance(linear_model(config)).n_target, "lyapunov", true};
  }
  const SystemModel model = build_model(config);
  if (run.engine == Engine::master_equation && !model.time_dependent()) {
    const SteadyState ss = steady_state(model);
    return {expectation(ss.state, model.n_target()).real(), to_string(ss.method), true};
  }
  const Initial init = make_initial(config, model);
  const double t_final = run.t_final_s ? *run.t_final_s : default_cool_time(config);
  const Simulation sim = simulate(config, model, init, t_final);
  const Plateau p =
      plateau(sim.series.times, sim.series.n_target, sim.sem ? &*sim.sem : nullptr);
  return {p.value, "plateau", p.stationary};
}

std::optional<double> simple_estimate(const SystemModel& model) {
  const double gamma = model.target().damping_rate;
  const double kappa = model.coupling().g > 0.0 ? model.aux().damping_rate : 0.0;
  if (gamma + kappa <= 0.0) return std::nullopt;
  return estimate_cooling(gamma, kappa, model.target_occupation());
}

}  // namespace

double default_cool_time(const ScenarioConfig& config) {
  const LinearModel lin = linear_model(config);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> solver(lin.drift(), false);
  double slowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) slowest = std::min(slowest, -2.0 * solver.eigenvalues()(i).real());
  double t = 0.0;
  if (lin.g > 0.0) t = 5.0 * constants::pi / lin.g;
  if (slowest > 0.0) t = std::max(t, 15.0 / slowest);
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ConfigError("cannot choose a run duration for an undamped, uncoupled model; set "
                      "run.t_final_s");
  }
  return t;
}

double default_swap_time(const ScenarioConfig& config) {
  if (!(config.coupling.g_per_s > 0.0)) {
    throw ConfigError("swap needs coupling.g_per_s > 0 (or set run.t_final_s)");
  }
  return constants::pi / config.coupling.g_per_s;
}

std::string parameter_echo(const ScenarioConfig& c) {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  auto num = [](double v) { return fmt::format("{:.10g}", v); };
  line("scenario", c.name);
  for (const auto& [name, mode] : {std::pair{"target", &c.target}, std::pair{"aux", &c.aux}}) {
    const ModeParams p = resolve_mode(*mode);
    const std::string s = name;
    line(s + ".frequency_hz", num(mode->frequency_hz));
    line(s + ".angular_frequency_rad_per_s", num(p.angular_frequency));
    line(s + ".damping_per_s", num(p.damping_rate));
    line(s + ".damping_over_2pi_hz", num(p.damping_rate / (2.0 * constants::pi)));
    line(s + ".quality_factor", num(p.quality_factor()));
    if (mode->temperature_k) line(s + ".temperature_k", num(*mode->temperature_k));
    line(s + ".n_thermal", num(p.occupation()));
    line(s + ".n_thermal_source", mode->temperature_k ? "temperature_k" : "n_occ");
    line(s + ".truncation", std::to_string(mode->truncation));
  }
  const ModeParams target = resolve_mode(c.target);
  line("coupling.g_per_s", num(c.coupling.g_per_s));
  line("coupling.frame", to_string(c.coupling.frame));
  if (c.coupling.g_per_s > 0.0) {
    line("coupling.omega_over_g", num(target.angular_frequency / c.coupling.g_per_s));
    line("coupling.swap_time_s", num(constants::pi / (2.0 * c.coupling.g_per_s)));
  }
  if (c.coupling.frame == Frame::lab_modulated) {
    const double delta = 2.0 * constants::pi * (c.aux.frequency_hz - c.target.frequency_hz);
    line("coupling.modulation_rad_per_s",
         num(c.coupling.modulation_hz ? 2.0 * constants::pi * *c.coupling.modulation_hz : delta));
    line("coupling.modulation_amplitude_per_s", num(2.0 * c.coupling.g_per_s));
  }
  const Complex beta = resolve_drive(c).beta;
  line("drive.beta_re", num(beta.real()));
  line("drive.beta_im", num(beta.imag()));
  line("drive.beta_abs", num(std::abs(beta)));
  if (c.drive.power_w) line("drive.power_w", num(*c.drive.power_w));
  const RunConfig& r = c.run;
  line("run.engine", to_string(r.engine));
  line("run.initial", to_string(r.initial));
  if (r.t_final_s) line("run.t_final_s", num(*r.t_final_s));
  if (r.dt_s) line("run.dt_s", num(*r.dt_s));
  line("run.tolerance", num(r.tolerance));
  line("run.samples", std::to_string(r.samples));
  if (r.engine == Engine::trajectories) {
    line("run.trajectories", std::to_string(r.trajectories));
    line("run.seed", std::to_string(r.seed));
    line("run.unraveling", to_string(r.unraveling));
  }
  return out;
}

RunReport cmd_cool(const ScenarioConfig& config, const fs::path& out_dir) {
  validate(config);
  const fs::path dir = prepare(out_dir);
  RunReport report("cool");
  const SystemModel model = build_model(config);
  const double t_final = config.run.t_final_s ? *config.run.t_final_s : default_cool_time(config);
  const Initial init = make_initial(config, model);
  const Simulation sim = simulate(config, model, init, t_final);

  const std::vector<double>* sem = sim.sem ? &*sim.sem : nullptr;
  write_series_csv(dir / kSeriesFile, sim.series, sem);
  report.add_file(dir / kSeriesFile);
  record_run(report, config, model, init, sim, t_final);

  const Plateau p = plateau(sim.series.times, sim.series.n_target, sem);
  report.add("plateau_n_target", p.value);
  report.trace("plateau_n_target", kSeriesFile, "n_target", "mean of final 5%");
  report.add("plateau_drift", p.drift);
  report.add("plateau_allowed_drift", p.allowed);
  report.add_flag("plateau_stationary", p.stationary);

  double steady = p.value;
  std::string method = "plateau";
  if (config.run.engine == Engine::master_equation && !model.time_dependent()) {
    const SteadyState ss = steady_state(model);
    steady = expectation(ss.state, model.n_target()).real();
    method = to_string(ss.method);
    report.add("steady_residual", ss.residual);
  } else if (config.run.engine == Engine::langevin) {
    steady = steady_covariance(linear_model(model)).n_target;
    method = "lyapunov";
  }
  report.add("steady_n_target", steady);
  report.add("steady_method", method);
  if (method == "plateau") {
    report.trace("steady_n_target", kSeriesFile, "n_target", "mean of final 5%");
    report.set_converged(p.stationary);
    if (!p.stationary) {
      report.warn(fmt::format("n_target not stationary: final-window drift {:.3e} exceeds {:.3e}; "
                              "increase run.t_final_s",
                              p.drift, p.allowed));
    }
  } else if (!p.stationary) {
    report.warn(fmt::format("time series not yet stationary at t_final (drift {:.3e}); the "
                            "steady value comes from the {} solve",
                            p.drift, method));
  }

  if (const auto estimate = simple_estimate(model)) {
    report.add("estimate_n_target", *estimate);
    report.add("ratio_to_estimate", steady / *estimate);
  }
  if (steady > 0.0) report.add("cooling_factor", init.n_target / steady);

  write_common(config, dir, report);
  finish(dir, report);
  return report;
}

RunReport cmd_swap(const ScenarioConfig& config, const fs::path& out_dir) {
  validate(config);
  const fs::path dir = prepare(out_dir);
  RunReport report("swap");
  const SystemModel model = build_model(config);
  const double t_final = config.run.t_final_s ? *config.run.t_final_s : default_swap_time(config);
  const Initial init = make_initial(config, model);
  const Simulation sim = simulate(config, model, init, t_final);

  const std::vector<double>* sem = sim.sem ? &*sim.sem : nullptr;
  write_series_csv(dir / kSeriesFile, sim.series, sem);
  report.add_file(dir / kSeriesFile);
  record_run(report, config, model, init, sim, t_final);
  write_common(config, dir, report);

  const auto minimum = first_minimum(sim.series.times, sim.series.n_target);
  if (!minimum) {
    report.set_converged(false);
    report.warn("no minimum of n_target within t_final");
    finish(dir, report);
    throw RunError(fmt::format("swap: no minimum of <n_target> within t_final = {:.4e} s; "
                               "increase run.t_final_s",
                               t_final));
  }
  const double g = model.coupling().g;
  report.add("swap_time_s", minimum->time);
  report.trace("swap_time_s", kSeriesFile, "t_s", "first local minimum of n_target, parabolic");
  if (g > 0.0) report.add("swap_time_over_tau", minimum->time / (constants::pi / (2.0 * g)));
  report.add("swap_min_n_target", minimum->value);
  report.trace("swap_min_n_target", kSeriesFile, "n_target", "first local minimum, parabolic");
  if (minimum->value > 0.0) report.add("cooling_factor", init.n_target / minimum->value);
  report.add_flag("initial_under_truncated", init.under_truncated);
  if (init.under_truncated) {
    report.warn(fmt::format("initial thermal state under-truncated: represented <n> = {:.4g} "
                            "against nominal {:.4g}; the cooling factor uses the represented value",
                            init.n_target, init.n_nominal));
  }
  finish(dir, report);
  return report;
}

RunReport cmd_control(const ScenarioConfig& config, const fs::path& out_dir) {
  validate(config);
  const Complex beta = resolve_drive(config).beta;
  if (!config.drive.present()) {
    throw RunError("control: drive absent; set [drive] beta_re/beta_im or power_w");
  }
  if (config.run.engine == Engine::trajectories) {
    throw ConfigError("control: use engine = master_equation or langevin");
  }
  if (config.coupling.frame != Frame::interaction_rwa) {
    throw ConfigError("control: the driven steady state needs coupling.frame = interaction_rwa");
  }
  const fs::path dir = prepare(out_dir);
  RunReport report("control");
  const SystemModel model = build_model(config);
  const LinearModel lin = linear_model(model);
  const double t_final = config.run.t_final_s ? *config.run.t_final_s : default_cool_time(config);
  const Initial init = make_initial(config, model);
  const Simulation sim = simulate(config, model, init, t_final);
  write_series_csv(dir / kSeriesFile, sim.series);
  report.add_file(dir / kSeriesFile);
  record_run(report, config, model, init, sim, t_final);

  Complex a_ss;
  double n_ss = 0.0;
  double n_c = 0.0;
  if (config.run.engine == Engine::master_equation) {
    const SteadyState ss = steady_state(model);
    a_ss = expectation(ss.state, model.a());
    n_ss = expectation(ss.state, model.n_target()).real();
    ScenarioConfig undriven = config;
    undriven.drive = DriveConfig{};
    const SystemModel cooled = build_model(undriven);
    n_c = expectation(steady_state(cooled).state, cooled.n_target()).real();
    report.add("steady_method", to_string(ss.method));
  } else {
    const SecondMoments m = steady_covariance(lin);
    a_ss = m.mean(0);
    n_ss = m.n_target;
    n_c = m.fluctuations(0, 0).real();
    report.add("steady_method", "lyapunov");
  }
  const CoherentAmplitude linear = coherent_amplitude(beta, lin.gamma, lin.kappa, lin.g);

  report.add("a_ss_re", a_ss.real());
  report.add("a_ss_im", a_ss.imag());
  report.add("a_ss_abs", std::abs(a_ss));
  report.add("a_ss_arg_rad", std::arg(a_ss));
  report.add("a_exact_re", linear.exact.real());
  report.add("a_exact_im", linear.exact.imag());
  const double scale = std::max(std::abs(linear.exact), 1e-300);
  report.add("a_ss_rel_dev_exact", std::abs(a_ss - linear.exact) / scale);
  if (linear.closed_form_singular) {
    report.add("a_closed_form", "undefined (kappa^2 = 9 g^2 or g = 0)");
  } else {
    report.add("a_closed_form_re", linear.closed_form.real());
    report.add("a_closed_form_im", linear.closed_form.imag());
    report.add("a_closed_form_rel_dev_exact",
               std::abs(linear.closed_form - linear.exact) / scale);
  }
  report.add("steady_n_target", n_ss);
  report.add("cooled_n_target", n_c);
  const double decomposition = std::norm(a_ss) + n_c;
  report.add("decomposition_n_target", decomposition);
  report.add("decomposition_rel_dev", std::abs(n_ss - decomposition) / n_ss);

  const DecayConstants dc = decay_constants(lin.gamma, lin.kappa, lin.g);
  report.add("lambda_plus_re", dc.lambda_plus.real());
  report.add("lambda_minus_re", dc.lambda_minus.real());
  report.add("lambda_minus_im", dc.lambda_minus.imag());
  report.add_flag("lambda_complex_regime", dc.complex_regime);
  report.add("slowest_energy_rate_exact", dc.energy_rates(1).real());

  std::vector<double> deviation;
  deviation.reserve(sim.series.a.size());
  for (const Complex& a : sim.series.a) deviation.push_back(std::norm(a - a_ss));
  if (const auto rate = tail_decay_rate(sim.series.times, deviation)) {
    report.add("settling_rate_per_s", *rate);
    report.add("settling_time_s", 1.0 / *rate);
    report.trace("settling_time_s", kSeriesFile, "re_a,im_a",
                 "inverse tail log-slope of |a - a_ss|^2");
    if (!dc.complex_regime && dc.lambda_minus.real() > 0.0) {
      report.add("inverse_lambda_minus_s", 1.0 / dc.lambda_minus.real());
      report.add("settling_over_inverse_lambda_minus", dc.lambda_minus.real() / *rate);
    }
  } else {
    report.warn("settling time unavailable: |a - a_ss|^2 never entered the fit window; "
                "increase run.t_final_s");
  }
  write_common(config, dir, report);
  finish(dir, report);
  return report;
}

RunReport cmd_validate_frames(const ScenarioConfig& config, const fs::path& out_dir) {
  validate(config);
  if (config.run.engine != Engine::master_equation) {
    throw ConfigError("validate-frames: use engine = master_equation");
  }
  const fs::path dir = prepare(out_dir);
  RunReport report("validate-frames");
  const SystemModel lab = build_model(config, Frame::lab_modulated);
  const SystemModel full = build_model(config, Frame::interaction_full);
  const double t_final = config.run.t_final_s ? *config.run.t_final_s : default_swap_time(config);
  const Initial init = make_initial(config, full);

  const Simulation lab_run = simulate(config, lab, init, t_final);
  const Simulation full_run = simulate(config, full, init, t_final);
  write_series_csv(dir / "lab_modulated.csv", lab_run.series);
  write_series_csv(dir / "interaction_full.csv", full_run.series);
  report.add_file(dir / "lab_modulated.csv");
  report.add_file(dir / "interaction_full.csv");
  record_run(report, config, full, init, full_run, t_final);
  report.add("lab_dt_s", lab_run.dt);

  double max_dev = 0.0;
  double scale = init.n_target;
  for (std::size_t i = 0; i < lab_run.series.n_target.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(lab_run.series.n_target[i] - full_run.series.n_target[i]));
    scale = std::max(scale, full_run.series.n_target[i]);
  }
  report.add("aux_over_target_frequency", config.aux.frequency_hz / config.target.frequency_hz);
  report.add("g_over_omega", config.coupling.g_per_s / lab.target().angular_frequency);
  report.add("max_abs_deviation", max_dev);
  report.add("max_rel_deviation", max_dev / scale);
  report.trace("max_abs_deviation", "lab_modulated.csv,interaction_full.csv", "n_target",
               "max over samples of |difference|");
  write_common(config, dir, report);
  finish(dir, report);
  return report;
}

RunReport cmd_sweep(const ScenarioConfig& config, const fs::path& out_dir) {
  validate(config);
  const auto& axes = config.sweep.axes;
  if (axes.empty()) throw ConfigError("sweep: set [sweep] parameter and values");
  const fs::path dir = prepare(out_dir);
  RunReport report("sweep");

  std::vector<std::vector<double>> grid;
  for (double v : axes[0].values) {
    if (axes.size() == 1) {
      grid.push_back({v});
    } else {
      for (double w : axes[1].values) grid.push_back({v, w});
    }
  }
  struct Row {
    SteadyMetric metric;
    std::optional<double> estimate;
    double n0 = 0.0;
  };
  std::vector<Row> rows(grid.size());
  std::vector<std::string> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        ScenarioConfig point = config;
        point.sweep = SweepConfig{};
        for (std::size_t k = 0; k < axes.size(); ++k) {
          set_parameter(point, axes[k].parameter, grid[i][k]);
        }
        validate(point);
        point.run.threads = 1;
        rows[i].metric = steady_metric(point);
        const SystemModel model = build_model(point);
        rows[i].estimate = simple_estimate(model);
        rows[i].n0 = thermal_state(model.space(), Mode::target, model.target_occupation())
                         .truncated_mean;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  int threads = config.run.threads > 0 ? config.run.threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(grid.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!errors[i].empty()) {
      throw RunError(fmt::format("sweep point {} failed: {}", i, errors[i]));
    }
  }

  std::string csv;
  for (const auto& axis : axes) csv += axis.parameter + ",";
  csv += "steady_n_target,estimate_n_target,ratio_to_estimate,cooling_factor,method,stationary\n";
  bool all_stationary = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (double v : grid[i]) csv += format_number(v) + ",";
    const Row& r = rows[i];
    const double estimate = r.estimate.value_or(std::nan(""));
    csv += fmt::format("{},{},{},{},{},{}\n", format_number(r.metric.n_target),
                       format_number(estimate), format_number(r.metric.n_target / estimate),
                       format_number(r.n0 / r.metric.n_target), r.metric.method,
                       r.metric.stationary ? "true" : "false");
    all_stationary = all_stationary && r.metric.stationary;
  }
  write_text(dir / "sweep.csv", csv);
  report.add_file(dir / "sweep.csv");
  report.add("scenario", config.name);
  report.add("engine", to_string(config.run.engine));
  report.add("points", static_cast<double>(grid.size()));
  report.set_converged(all_stationary);
  write_common(config, dir, report);
  finish(dir, report);
  return report;
}

}  // namespace freqconv::app
