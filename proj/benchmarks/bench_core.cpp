#include <benchmark/benchmark.h>

#include "freqconv/langevin.hpp"
#include "freqconv/lindblad.hpp"
#include "freqconv/mcwf.hpp"

using namespace freqconv;

namespace {

// 20 MHz target at Q = 1e5 against a 1e6/s auxiliary mode, g = omega/(20 pi).
SystemModel cooling_model(int dim, Frame frame = Frame::interaction_rwa) {
  const double omega = 2 * constants::pi * 20e6;
  return SystemModel(ModeParams{omega, omega / 1e5, Occupation{3.68}, dim},
                     ModeParams{2 * constants::pi * 5e9, 1e6, Occupation{0.0}, dim},
                     CouplingParams{omega / (20 * constants::pi), frame});
}

}  // namespace

static void LiouvillianApply(benchmark::State& state) {
  const auto dim = static_cast<int>(state.range(0));
  const SystemModel model = cooling_model(dim, state.range(1) ? Frame::interaction_full
                                                              : Frame::interaction_rwa);
  const Liouvillian l(model);
  const FockSpace& space = model.space();
  const RhoMatrix rho = product_state(space, thermal_state(space, Mode::target, 3.68).rho,
                                      thermal_state(space, Mode::aux, 0.0).rho)
                            .matrix();
  RhoMatrix out(rho.rows(), rho.cols());
  for (auto _ : state) {
    l.apply(1e-7, rho, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * rho.size());
}
BENCHMARK(LiouvillianApply)
    ->ArgsProduct({{8, 16, 32}, {0, 1}})
    ->ArgNames({"dim", "full"})
    ->Unit(benchmark::kMicrosecond);

static void SteadyStateDirect(benchmark::State& state) {
  const SystemModel model = cooling_model(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(steady_state(model).residual);
  }
}
BENCHMARK(SteadyStateDirect)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void TrajectoryEnsemble(benchmark::State& state) {
  const SystemModel model = cooling_model(16);
  TrajectoryConfig config;
  config.n_trajectories = static_cast<int>(state.range(0));
  config.seed = 7;
  config.t_final = 1e-6;
  config.samples = 51;
  config.threads = 1;
  for (auto _ : state) {
    const EnsembleResult e = run_ensemble(model, ThermalSpec{3.68, 0.0}, config);
    benchmark::DoNotOptimize(e.mean.n_target.back());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(TrajectoryEnsemble)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void LyapunovCovariance(benchmark::State& state) {
  const LinearModel model{1256.6, 1e6, 2e6, 3.68, 0.0, {200.0, 0.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(steady_covariance(model).n_target);
  }
}
BENCHMARK(LyapunovCovariance);

BENCHMARK_MAIN();
