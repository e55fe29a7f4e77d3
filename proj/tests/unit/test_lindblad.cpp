#include <doctest.h>

#include <cmath>
#include <random>

#include "freqconv/langevin.hpp"
#include "freqconv/lindblad.hpp"
#include "oracles.hpp"

using namespace freqconv;
using constants::pi;

namespace {

ModeParams mode(double hz, double damping, double n, int dim) {
  return ModeParams{2 * pi * hz, damping, Occupation{n}, dim};
}

RhoMatrix random_state(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  CMatrix x(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) x(i, j) = Complex(normal(rng), normal(rng));
  CMatrix rho = x * x.adjoint();
  rho /= rho.trace();
  return rho;
}

double apply_error(const SystemModel& model, double t, unsigned seed) {
  const Liouvillian l(model);
  const int d = model.space().joint_dim();
  const RhoMatrix rho = random_state(d, seed);
  RhoMatrix out(d, d);
  l.apply(t, rho, out);
  const CMatrix dense_rho = rho;
  const Eigen::VectorXcd vec = Eigen::Map<const Eigen::VectorXcd>(dense_rho.data(), d * d);
  const Eigen::VectorXcd ref = oracle::dense_liouvillian(model, t) * vec;
  const CMatrix expected = Eigen::Map<const CMatrix>(ref.data(), d, d);
  return (CMatrix(out) - expected).norm() / expected.norm();
}

}  // namespace

TEST_SUITE("lindblad") {

TEST_CASE("superoperator matches the dense vectorized form") {
  const ModeParams target = mode(20e6, 2e4, 1.3, 4);
  const ModeParams aux = mode(200e6, 1e6, 0.2, 3);
  CHECK(apply_error(SystemModel(target, aux, CouplingParams{2e6, Frame::interaction_rwa}), 0.0, 1) < 1e-13);
  CHECK(apply_error(SystemModel(target, aux, CouplingParams{2e6, Frame::interaction_full}), 3.3e-9, 2) < 1e-13);
  CHECK(apply_error(SystemModel(target, aux, CouplingParams{2e6, Frame::lab_modulated}), 1.7e-9, 3) < 1e-13);
  CHECK(apply_error(SystemModel(target, aux, CouplingParams{2e6, Frame::interaction_rwa},
                                DriveParams{Complex(40.0, -25.0)}), 0.0, 4) < 1e-13);
}

TEST_CASE("effective Hamiltonian is H - i/2 sum L^dag L") {
  const SystemModel m(mode(20e6, 2e4, 1.3, 3), mode(5e9, 1e6, 0.2, 3),
                      CouplingParams{2e6, Frame::interaction_full});
  const Liouvillian l(m);
  const double t = 2.2e-9;
  CMatrix expected = m.propagation_hamiltonian().at(t).dense();
  for (const auto& d : m.dissipators()) {
    const CMatrix c = d.jump.dense();
    expected -= Complex(0, 0.5) * d.rate * c.adjoint() * c;
  }
  CHECK((CMatrix(l.effective_hamiltonian(t)) - expected).norm() / expected.norm() < 1e-14);
  CHECK(l.jumps().size() == 4);
}

TEST_CASE("damped single mode follows the exponential law") {
  const double gamma = 2e5, nt = 0.5;
  const SystemModel m(mode(20e6, gamma, nt, 30), mode(5e9, 0, 0, 2), CouplingParams{0.0});
  const DensityOperator rho0 = DensityOperator::from_pure(JointState::fock(m.space(), 3, 0));
  const PropagationResult r = propagate(m, rho0, 3.0 / gamma);
  const auto& obs = r.observables;
  for (std::size_t i = 0; i < obs.times.size(); ++i) {
    const double expected = oracle::decay_law(3.0, nt, gamma, obs.times[i]);
    CHECK(std::abs(obs.n_target[i] - expected) < 1e-3 * expected);
    CHECK(std::abs(obs.trace[i] - 1.0) < 1e-6);
  }
}

TEST_CASE("undamped RWA pair performs a perfect swap") {
  const double g = 2e6;
  const SystemModel m(mode(20e6, 0, 0, 3), mode(5e9, 0, 0, 3), CouplingParams{g});
  const DensityOperator rho0 = DensityOperator::from_pure(JointState::fock(m.space(), 1, 0));
  PropagationOptions opt;
  opt.samples = 101;
  const PropagationResult r = propagate(m, rho0, pi / g, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.observables.times.size(); ++i) {
    worst = std::max(worst, std::abs(r.observables.n_target[i] -
                                     oracle::swap_population(g, r.observables.times[i])));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("thermal product state is a fixed point without coupling") {
  const SystemModel m(mode(20e6, 3e4, 0.8, 12), mode(5e9, 1e6, 0.1, 6), CouplingParams{0.0});
  const DensityOperator rho0 =
      product_state(m.space(), thermal_state(m.space(), Mode::target, 0.8).rho,
                    thermal_state(m.space(), Mode::aux, 0.1).rho);
  PropagationOptions opt;
  opt.check_positivity = true;
  const PropagationResult r = propagate(m, rho0, 5e-5, opt);
  for (std::size_t i = 0; i < r.observables.times.size(); ++i) {
    CHECK(std::abs(r.observables.n_target[i] - r.observables.n_target[0]) < 1e-10);
    CHECK(std::abs(r.observables.n_aux[i] - r.observables.n_aux[0]) < 1e-10);
  }
  REQUIRE(r.min_eigenvalue);
  CHECK(*r.min_eigenvalue > -1e-8);
}

TEST_CASE("propagation keeps the state physical") {
  const SystemModel m(mode(20e6, 1e4, 2.0, 10), mode(5e9, 1e6, 0.0, 6),
                      CouplingParams{2e6, Frame::interaction_full});
  const DensityOperator rho0 = product_state(
      m.space(), thermal_state(m.space(), Mode::target, 1.0).rho,
      thermal_state(m.space(), Mode::aux, 0.0).rho);
  PropagationOptions opt;
  opt.check_positivity = true;
  opt.samples = 41;
  const PropagationResult r = propagate(m, rho0, 1e-6, opt);
  CHECK(*r.min_eigenvalue > -1e-8);
  for (std::size_t i = 0; i < r.observables.times.size(); ++i) {
    CHECK(r.observables.n_target[i] > -1e-8);
    CHECK(r.observables.n_aux[i] > -1e-8);
    CHECK(std::abs(r.observables.trace[i] - 1.0) < 1e-6);
  }
  CHECK(r.dt <= pi / m.target().angular_frequency / 20.0);
  CHECK_NOTHROW(r.final_state.validate(1e-8));
}

TEST_CASE("step control errors") {
  const SystemModel full(mode(20e6, 1e4, 1.0, 4), mode(5e9, 1e6, 0.0, 3),
                         CouplingParams{2e6, Frame::interaction_full});
  const DensityOperator rho0 = DensityOperator::from_pure(JointState::fock(full.space(), 1, 0));
  PropagationOptions coarse;
  coarse.dt = 1e-8;  // period of the 2ω phase is 2.5e-8 s
  CHECK_THROWS_AS(propagate(full, rho0, 1e-6, coarse), std::invalid_argument);

  const SystemModel rwa(mode(20e6, 1e4, 1.0, 8), mode(5e9, 1e6, 0.0, 8), CouplingParams{2e6});
  const DensityOperator rho1 = DensityOperator::from_pure(JointState::fock(rwa.space(), 3, 0));
  PropagationOptions unstable;
  unstable.dt = 1e-5;
  unstable.samples = 3;
  CHECK_THROWS_AS(propagate(rwa, rho1, 1e-4, unstable), PropagationError);
}

TEST_CASE("steady state of a single damped mode") {
  const double nt = 3.68;
  const SystemModel m(mode(20e6, 2 * pi * 200.0, nt, 32), mode(5e9, 0, 0, 2), CouplingParams{0.0});
  const SteadyState ss = steady_state(m);
  CHECK(expectation(ss.state, m.n_target()).real() ==
        doctest::Approx(oracle::truncated_thermal_mean(nt, 32)).epsilon(1e-6));
  CHECK(ss.residual < 1e-10);
  CHECK(std::abs(ss.state.trace() - 1.0) < 1e-12);
}

TEST_CASE("driven steady state matches the linear drift solve") {
  const double gamma = 2e3, kappa = 1e6, g = 2e5;
  const Complex beta(30.0, 10.0);
  const SystemModel m(mode(20e6, gamma, 0.3, 12), mode(5e9, kappa, 0.0, 5), CouplingParams{g},
                      DriveParams{beta});
  const SteadyState ss = steady_state(m);
  const Complex a = expectation(ss.state, m.a());
  const Complex expected = oracle::steady_amplitude(beta, gamma, kappa, g);
  CHECK(std::abs(a - expected) < 0.01 * std::abs(expected));
  CHECK(ss.residual < 1e-10);
}

TEST_CASE("steady state is stationary under propagation") {
  const SystemModel m(mode(20e6, 1e4, 1.5, 10), mode(5e9, 1e6, 0.0, 5), CouplingParams{1e6});
  const SteadyState ss = steady_state(m);
  PropagationOptions opt;
  opt.samples = 21;
  const PropagationResult r = propagate(m, ss.state, 2e-6, opt);
  const double n0 = r.observables.n_target.front();
  for (double n : r.observables.n_target) CHECK(std::abs(n - n0) < 1e-9 * std::max(1.0, n0));
}

TEST_CASE("steady occupation decreases with auxiliary damping") {
  const double gamma = 1e4, g = 1e6, nt = 0.5;
  double previous = 1e9;
  for (double kappa : {0.1e6, 0.2e6, 0.4e6, 0.8e6}) {
    const SystemModel m(mode(20e6, gamma, nt, 8), mode(5e9, kappa, 0.0, 6), CouplingParams{g});
    const double n = expectation(steady_state(m).state, m.n_target()).real();
    CHECK(n <= previous);
    previous = n;
  }
}

TEST_CASE("steady state rejects time dependence and undamped models") {
  const SystemModel full(mode(20e6, 1e4, 1.0, 3), mode(5e9, 1e6, 0.0, 3),
                         CouplingParams{2e6, Frame::interaction_full});
  CHECK_THROWS_AS(steady_state(full), std::invalid_argument);
  const SystemModel closed(mode(20e6, 0, 0, 3), mode(5e9, 0, 0, 3), CouplingParams{2e6});
  CHECK_THROWS(steady_state(closed));
}

TEST_CASE("suggested step resolves the explicit time dependence") {
  const SystemModel full(mode(20e6, 1e4, 1.0, 4), mode(5e9, 1e6, 0.0, 3),
                         CouplingParams{2e6, Frame::interaction_full});
  const Liouvillian l(full);
  const double period = pi / full.target().angular_frequency;
  CHECK(suggest_step(l) <= period / 20.0);
  CHECK(l.rate_bound() > 0.0);
}

}
