#pragma once

#include <vector>

#include "freqconv/lindblad.hpp"
#include "freqconv/mcwf.hpp"

namespace freqconv::detail {

/// Shared read-only state of an ensemble run.
struct TrajectoryContext {
  const SystemModel& model;
  const Liouvillian& liouvillian;
  double step;           ///< integrator step h
  long long substeps;    ///< steps per sample interval
  int intervals;         ///< samples - 1
  double t_final;
};

/// Observables of one trajectory at every sample time.
struct TrajectoryRecord {
  std::vector<double> n_target;
  std::vector<double> n_aux;
  std::vector<Complex> a;
  std::vector<Complex> b;
  long long jumps = 0;
  std::vector<long long> channel_jumps;

  void reset(int samples, std::size_t channels);
};

/// Normalized expectation values of ψ, rotated to the reporting frame.
void record_ket(const TrajectoryContext& ctx, const CVector& psi, double t, int sample,
                TrajectoryRecord& record);

void run_jump_trajectory(const TrajectoryContext& ctx, CVector psi, TrajectoryRng& rng,
                         TrajectoryRecord& record);

void run_diffusion_trajectory(const TrajectoryContext& ctx, CVector psi, TrajectoryRng& rng,
                              TrajectoryRecord& record);

}  // namespace freqconv::detail
