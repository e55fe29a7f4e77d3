#include <doctest.h>

#include <cmath>

#include "freqconv/lindblad.hpp"
#include "freqconv/mcwf.hpp"
#include "oracles.hpp"

using namespace freqconv;
using constants::pi;

namespace {

ModeParams mode(double hz, double damping, double n, int dim) {
  return ModeParams{2 * pi * hz, damping, Occupation{n}, dim};
}

/// Fraction of sample times at which the ensemble mean lies within 3 SEM
/// of the reference. Points where both the SEM and the difference vanish
/// count as agreement.
double agreement(const EnsembleResult& e, const std::vector<double>& reference) {
  int good = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double diff = std::abs(e.mean.n_target[i] - reference[i]);
    if (diff <= 3.0 * e.sem_n_target[i] + 1e-12) ++good;
  }
  return static_cast<double>(good) / reference.size();
}

}  // namespace

TEST_SUITE("mcwf") {

TEST_CASE("no dynamics: constant trajectories with zero spread") {
  const SystemModel m(mode(20e6, 0, 0, 4), mode(5e9, 0, 0, 3), CouplingParams{0.0});
  TrajectoryConfig cfg;
  cfg.n_trajectories = 64;
  cfg.t_final = 1e-6;
  cfg.samples = 11;
  const EnsembleResult r = run_ensemble(m, JointState::fock(m.space(), 2, 1), cfg);
  for (std::size_t i = 0; i < r.mean.times.size(); ++i) {
    CHECK(r.mean.n_target[i] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.sem_n_target[i] == 0.0);
  }
  for (long long j : r.jump_counts) CHECK(j == 0);
}

TEST_CASE("zero-temperature decay of a single excitation") {
  const double gamma = 1e5;
  const SystemModel m(mode(20e6, gamma, 0, 3), mode(5e9, 0, 0, 2), CouplingParams{0.0});
  TrajectoryConfig cfg;
  cfg.n_trajectories = 4096;
  cfg.seed = 11;
  cfg.t_final = 3.0 / gamma;
  cfg.samples = 31;
  const EnsembleResult r = run_ensemble(m, JointState::fock(m.space(), 1, 0), cfg);
  std::vector<double> law;
  for (double t : r.mean.times) law.push_back(std::exp(-gamma * t));
  CHECK(agreement(r, law) >= 0.95);
  CHECK(r.sem_n_target.back() > 0.0);
  long long total = 0;
  for (long long j : r.jump_counts) total += j;
  CHECK(total == r.channel_jumps[0]);
}

TEST_CASE("ensemble reproduces the master equation on a small model") {
  const SystemModel m(mode(20e6, 2e4, 1.0, 6), mode(5e9, 1e6, 0.0, 5), CouplingParams{2e6});
  TrajectoryConfig cfg;
  cfg.n_trajectories = 4096;
  cfg.seed = 5;
  cfg.t_final = 3e-6;
  cfg.samples = 61;
  const EnsembleResult r = run_ensemble(m, ThermalSpec{1.0, 0.0}, cfg);
  const DensityOperator rho0 = product_state(
      m.space(), thermal_state(m.space(), Mode::target, 1.0).rho,
      thermal_state(m.space(), Mode::aux, 0.0).rho);
  PropagationOptions opt;
  opt.samples = cfg.samples;
  const PropagationResult me = propagate(m, rho0, cfg.t_final, opt);
  CHECK(agreement(r, me.observables.n_target) >= 0.95);

  SUBCASE("diffusive unraveling agrees as well") {
    TrajectoryConfig qsd = cfg;
    qsd.unraveling = Unraveling::diffusion;
    qsd.n_trajectories = 1024;
    const EnsembleResult d = run_ensemble(m, ThermalSpec{1.0, 0.0}, qsd);
    CHECK(agreement(d, me.observables.n_target) >= 0.95);
    CHECK(d.jump_counts.empty());
  }
}

TEST_CASE("results do not depend on the thread schedule") {
  const SystemModel m(mode(20e6, 2e4, 1.0, 5), mode(5e9, 1e6, 0.0, 4), CouplingParams{2e6});
  TrajectoryConfig cfg;
  cfg.n_trajectories = 300;
  cfg.seed = 99;
  cfg.t_final = 2e-6;
  cfg.samples = 21;
  cfg.threads = 1;
  const EnsembleResult serial = run_ensemble(m, ThermalSpec{1.0, 0.0}, cfg);
  cfg.threads = 3;
  const EnsembleResult parallel = run_ensemble(m, ThermalSpec{1.0, 0.0}, cfg);
  CHECK(serial.mean.n_target == parallel.mean.n_target);
  CHECK(serial.mean.a == parallel.mean.a);
  CHECK(serial.sem_n_target == parallel.sem_n_target);
  CHECK(serial.jump_counts == parallel.jump_counts);
  cfg.seed = 100;
  const EnsembleResult other = run_ensemble(m, ThermalSpec{1.0, 0.0}, cfg);
  CHECK(other.mean.n_target != serial.mean.n_target);
}

TEST_CASE("jump rate at thermal equilibrium") {
  const double gamma = 1e5, nt = 0.7;
  const int dim = 20;
  const SystemModel m(mode(20e6, gamma, nt, dim), mode(5e9, 0, 0, 2), CouplingParams{0.0});
  TrajectoryConfig cfg;
  cfg.n_trajectories = 2048;
  cfg.seed = 3;
  cfg.t_final = 20.0 / gamma;
  cfg.samples = 11;
  const EnsembleResult r = run_ensemble(m, ThermalSpec{nt, 0.0}, cfg);
  const double n = oracle::truncated_thermal_mean(nt, dim);
  // Truncation removes the a† channel from the top level; its weight is tiny here.
  const double rate = gamma * (nt + 1) * n + gamma * nt * (n + 1);
  double sum = 0, sum2 = 0;
  for (long long j : r.jump_counts) {
    sum += j;
    sum2 += double(j) * j;
  }
  const double mean = sum / r.n_trajectories;
  const double sem = std::sqrt((sum2 / r.n_trajectories - mean * mean) / (r.n_trajectories - 1));
  CHECK(std::abs(mean - rate * cfg.t_final) < 3.0 * sem);
}

TEST_CASE("thermal sampling of initial Fock states") {
  const FockSpace space(32, 32);
  TrajectoryRng rng(7, 0);
  SUBCASE("vacuum") {
    for (int k = 0; k < 100; ++k) {
      const JointState psi = sample_initial(space, ThermalSpec{0.0, 0.0}, rng);
      CHECK(std::abs(psi.amplitudes()(space.index(0, 0))) == 1.0);
    }
  }
  SUBCASE("mean occupation") {
    const int draws = 100000;
    double sum = 0.0, aux_excited = 0.0;
    const double n_aux = thermal_occupation(2 * pi * 5e9, 0.02);
    for (int k = 0; k < draws; ++k) {
      const JointState psi = sample_initial(space, ThermalSpec{3.68, n_aux}, rng);
      Eigen::Index idx;
      psi.amplitudes().cwiseAbs().maxCoeff(&idx);
      const auto [na, nb] = space.occupations(static_cast<int>(idx));
      sum += na;
      if (nb > 0) aux_excited += 1.0;
    }
    const double expected = oracle::truncated_thermal_mean(3.68, 32);
    const double sigma = std::sqrt(expected * (expected + 1.0) / draws);
    CHECK(std::abs(sum / draws - expected) < 3.0 * sigma);
    CHECK(aux_excited / draws < 1e-4);
  }
}

TEST_CASE("index sampling and random streams") {
  Eigen::VectorXd cumulative(3);
  cumulative << 0.2, 0.5, 1.0;
  CHECK(sample_index(cumulative, 0.0) == 0);
  CHECK(sample_index(cumulative, 0.2) == 1);
  CHECK(sample_index(cumulative, 0.49) == 1);
  CHECK(sample_index(cumulative, 0.999) == 2);

  TrajectoryRng a(1, 2), b(1, 2), c(1, 3);
  CHECK(a.uniform() == b.uniform());
  CHECK(a.normal() == b.normal());
  TrajectoryRng d(1, 2);
  CHECK(d.uniform() != c.uniform());
  TrajectoryRng e(42, 0);
  double s = 0, s2 = 0;
  for (int k = 0; k < 20000; ++k) {
    const double z = e.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / 20000) < 0.03);
  CHECK(std::abs(s2 / 20000 - 1.0) < 0.05);
}

TEST_CASE("invalid configurations and step failures") {
  const SystemModel m(mode(20e6, 1e5, 0, 4), mode(5e9, 1e6, 0, 3), CouplingParams{2e6});
  TrajectoryConfig cfg;
  cfg.t_final = 1e-6;
  cfg.n_trajectories = 0;
  CHECK_THROWS_AS(run_ensemble(m, ThermalSpec{}, cfg), std::invalid_argument);
  cfg.n_trajectories = 4;
  CHECK_THROWS_AS(run_ensemble(m, JointState::fock(FockSpace(3, 3), 0, 0), cfg),
                  std::invalid_argument);
  cfg.dt = 1e-5;
  cfg.samples = 2;
  cfg.t_final = 1e-5;
  CHECK_THROWS_AS(run_ensemble(m, JointState::fock(m.space(), 3, 0), cfg), TrajectoryError);
}

}
