#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "freqconv/fock.hpp"
#include "freqconv/lindblad.hpp"
#include "freqconv/model.hpp"

namespace freqconv {

/// Fock-diagonal thermal initial condition, sampled per trajectory.
struct ThermalSpec {
  double n_target = 0.0;
  double n_aux = 0.0;
};

using InitialCondition = std::variant<JointState, ThermalSpec>;

enum class Unraveling {
  jumps,      ///< quantum jumps, norm-threshold detection
  diffusion,  ///< quantum state diffusion, Milstein stepping
};

const char* to_string(Unraveling unraveling);

struct TrajectoryConfig {
  int n_trajectories = 1;
  std::uint64_t seed = 0;
  double t_final = 0.0;
  /// Uniform sample grid including t = 0 and t_final.
  int samples = 201;
  /// Ket integrator step. When absent: min(1/‖H_eff‖, shortest period/40)
  /// for jumps and a tenth of that for diffusion.
  std::optional<double> dt;
  /// 0 selects std::thread::hardware_concurrency().
  int threads = 0;
  Unraveling unraveling = Unraveling::jumps;
};

struct EnsembleResult {
  /// Ensemble means; `trace` is the mean normalized trajectory norm (1).
  ObservableSeries mean;
  std::vector<double> sem_n_target;
  std::vector<double> sem_n_aux;
  std::vector<double> sem_re_a;
  std::vector<double> sem_im_a;
  /// Jumps per trajectory, by trajectory index. Empty for diffusion.
  std::vector<long long> jump_counts;
  /// Jumps per dissipator channel summed over the ensemble, indexed like
  /// SystemModel::dissipators().
  std::vector<long long> channel_jumps;
  double dt = 0.0;
  int n_trajectories = 0;
};

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random stream of one trajectory, seeded from (seed, index) alone.
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t index);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  /// Standard normal (Box-Muller). Implemented here rather than with
  /// std::normal_distribution so streams match across standard libraries.
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Product Fock state |n_a, n_b⟩ with each n drawn from the truncated
/// geometric distribution of the mode.
JointState sample_initial(const FockSpace& space, const ThermalSpec& spec, TrajectoryRng& rng);

/// Index drawn from populations p (summing to 1) with a single uniform.
int sample_index(const Eigen::VectorXd& cumulative, double u);

/// Ensemble of stochastic pure-state trajectories whose mean reproduces
/// propagate() on the same model.
///
/// Results depend only on (model, initial, config minus `threads`): each
/// trajectory owns its stream and the reduction runs in index order.
EnsembleResult run_ensemble(const SystemModel& model, const InitialCondition& initial,
                            const TrajectoryConfig& config);

}  // namespace freqconv
