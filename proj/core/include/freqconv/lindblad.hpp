#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqconv/fock.hpp"
#include "freqconv/model.hpp"

namespace freqconv {

/// Row-major storage for ρ inside the integrators.
using RhoMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Right-hand side of the master equation for a SystemModel,
///
///   dρ/dt = -i[H, ρ] + Σ_k Γ_k (c_k ρ c_k† - ½{c_k† c_k, ρ}),
///
/// evaluated as K + K† + Σ_k L_k ρ L_k† with K = -i H_eff ρ and
/// H_eff = H - (i/2) Σ L_k† L_k. Also provides H_eff ψ for trajectories.
class Liouvillian {
 public:
  explicit Liouvillian(const SystemModel& model);

  const FockSpace& space() const { return space_; }

  /// out = L(t)[rho]. rho must be Hermitian and must not alias out.
  void apply(double t, const RhoMatrix& rho, RhoMatrix& out) const;

  /// out = -i H_eff(t) psi.
  void apply_effective(double t, const CVector& psi, CVector& out) const;

  /// H_eff(t) as a sparse matrix.
  SparseOp effective_hamiltonian(double t) const;

  /// √Γ c for every channel with Γ > 0, in dissipator order.
  const std::vector<SparseOp>& jumps() const { return jumps_; }
  /// Index into SystemModel::dissipators() for each entry of jumps().
  const std::vector<int>& jump_channels() const { return jump_channels_; }

  /// Upper bound on the spectral radius of the superoperator (1/s).
  double rate_bound() const { return rate_bound_; }
  /// Bound on ‖H_eff‖ alone, for ket integrators.
  double effective_norm_bound() const { return effective_bound_; }
  /// Oscillation frequencies of the explicit time dependence (rad/s).
  const std::vector<double>& frequencies() const { return frequencies_; }
  bool time_dependent() const { return !varying_.empty(); }

 private:
  /// Diagonal `offset` (column - row) of an operator: coeff(i) = O(i, i + offset).
  struct Band {
    int offset;
    CVector coeff;
    CVector coeff_conj;
    /// coeff's real part, used when every coefficient is real.
    Eigen::VectorXd coeff_real;
    bool real;
    int first;  ///< first row with i + offset in range
    int last;   ///< one past the last such row
  };
  using BandedOp = std::vector<Band>;

  static BandedOp to_bands(const SparseOp& op);
  /// Row `row` of out += BρB†.
  static void add_sandwich(const BandedOp& op, const RhoMatrix& rho, int row, RhoMatrix& out);

  struct VaryingTerm {
    SparseOp op;
    BandedOp bands;
    HamiltonianTerm coefficient;
  };

  FockSpace space_;
  SparseOp static_effective_;
  BandedOp static_bands_;
  std::vector<BandedOp> jump_bands_;
  std::vector<VaryingTerm> varying_;
  std::vector<SparseOp> jumps_;
  std::vector<int> jump_channels_;
  std::vector<double> frequencies_;
  double rate_bound_ = 0.0;
  double effective_bound_ = 0.0;
};

/// Largest stable/accurate fixed RK4 step for a model: the smaller of a
/// stability bound on the Liouvillian and 1/40 of the shortest explicit
/// oscillation period.
double suggest_step(const Liouvillian& liouvillian);

/// Named observable time series.
struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> n_target;
  std::vector<double> n_aux;
  std::vector<Complex> a;
  std::vector<Complex> b;
  std::vector<double> trace;
};

struct PropagationOptions {
  /// Fixed step. When absent a step is chosen by suggest_step() and, if
  /// `refine` is set, halved until the observables over the first tenth of
  /// the sample grid change by less than refine_tolerance (relative).
  std::optional<double> dt;
  bool refine = true;
  double refine_tolerance = 1e-6;
  int max_refinements = 5;
  /// Uniform sample grid including t = 0 and t_final.
  int samples = 201;
  double trace_tolerance = 1e-6;
  /// Evaluate the smallest eigenvalue of ρ at every sample (costly).
  bool check_positivity = false;
  long long max_steps = 2'000'000'000LL;
};

struct PropagationResult {
  ObservableSeries observables;
  DensityOperator final_state;
  double dt;
  long long steps;
  /// Smallest eigenvalue seen when check_positivity was requested.
  std::optional<double> min_eigenvalue;
  /// Number of step halvings performed by the refinement loop.
  int refinements = 0;
};

class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-step RK4 integration of the master equation from rho0 over
/// [0, t_final].
PropagationResult propagate(const SystemModel& model, const DensityOperator& rho0,
                            double t_final, const PropagationOptions& options = {});

/// Observables of one density matrix in the propagation frame, rotated to
/// the reporting frame at time t.
void record_observables(const SystemModel& model, const RhoMatrix& rho, double t,
                        ObservableSeries& series);

enum class SteadyStateMethod { direct_full, direct_sector, long_time };

const char* to_string(SteadyStateMethod method);

struct SteadyStateOptions {
  /// Largest sparse linear system attempted directly.
  long long max_direct_unknowns = 600'000;
  /// Required ‖L ρ‖_F / rate_bound after a direct solve.
  double residual_tolerance = 1e-10;
  /// Long-time fallback stops when ‖dρ/dt‖_F / rate_bound drops below this.
  double fallback_tolerance = 1e-12;
  double fallback_max_time = 0.0;  ///< 0: 200 / (slowest damping rate)
};

struct SteadyState {
  DensityOperator state;
  /// ‖L ρ‖_F / rate_bound.
  double residual;
  SteadyStateMethod method;
  long long unknowns;
};

class SteadyStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stationary state of a time-independent model. Uses a sparse LU
/// null-space solve of the vectorized Liouvillian with the trace condition;
/// when the model conserves total excitation number (undriven RWA) only the
/// excitation-balanced block of ρ is solved for.
SteadyState steady_state(const SystemModel& model, const SteadyStateOptions& options = {});

/// ‖L ρ‖_F / rate_bound for an arbitrary state.
double liouvillian_residual(const SystemModel& model, const DensityOperator& rho);

}  // namespace freqconv
