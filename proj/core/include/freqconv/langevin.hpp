#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "freqconv/fock.hpp"

namespace freqconv {

/// Linear Heisenberg-Langevin model of the coupled pair in the RWA,
///
///   d/dt (a, b) = drift (a, b) + (√γ a_in, √κ (b_in + β)),
///   drift = -[[γ/2, ig], [ig, κ/2]],
///
/// with thermal input occupations n_T (target) and n_aux (normally 0).
struct LinearModel {
  double gamma = 0.0;
  double kappa = 0.0;
  double g = 0.0;
  double n_thermal = 0.0;
  double n_aux = 0.0;
  Complex beta{0.0, 0.0};

  Eigen::Matrix2cd drift() const;
  /// (0, √κ β).
  Eigen::Vector2cd forcing() const;
  /// diag(γ n_T, κ n_aux): normally ordered input correlations.
  Eigen::Matrix2d diffusion() const;
};

/// Decay constants λ± = κ/2 ± √(κ²/4 − 4g²) and N± = √(λ±² + g²), next to
/// the exact eigenvalues of the drift matrix.
///
/// λ± are energy-domain rates; at γ = 0 they equal −2× the drift
/// eigenvalues (amplitude domain). Above g = κ/4 the square root turns
/// imaginary and `complex_regime` is set.
struct DecayConstants {
  Complex lambda_plus;
  Complex lambda_minus;
  Complex n_plus;
  Complex n_minus;
  bool complex_regime;
  /// Eigenvalues of drift(), ordered by real part (fastest decay first).
  Eigen::Vector2cd drift_eigenvalues;
  /// −2 × drift_eigenvalues, comparable to (λ+, λ−).
  Eigen::Vector2cd energy_rates;
  /// γ is not small against κ; the approximate form is off.
  bool gamma_not_small;
};

DecayConstants decay_constants(double gamma, double kappa, double g);

struct CoherentAmplitude {
  /// −iβ(√κ/g)(κ² − 6g²)/(κ² − 9g²); NaN when κ² = 9g² or g = 0.
  Complex closed_form;
  bool closed_form_singular;
  /// ⟨a⟩ from drift·x + forcing = 0.
  Complex exact;
  /// ⟨b⟩ from the same solve.
  Complex exact_aux;
};

CoherentAmplitude coherent_amplitude(Complex beta, double gamma, double kappa, double g);

/// Steady first moments (⟨a⟩, ⟨b⟩) solving drift·x + forcing = 0.
Eigen::Vector2cd steady_mean(const LinearModel& model);

/// First moments at time t from x0. Exact, and valid for undamped drift.
Eigen::Vector2cd mean_at(const LinearModel& model, const Eigen::Vector2cd& x0, double t);

/// Normally ordered steady second moments.
struct SecondMoments {
  /// ⟨δx_i† δx_j⟩ for x = (a, b): fluctuations only.
  Eigen::Matrix2cd fluctuations;
  Eigen::Vector2cd mean;
  /// ⟨a†a⟩ = |⟨a⟩|² + fluctuations(0, 0), likewise for b.
  double n_target;
  double n_aux;
  /// ⟨a†b⟩ including the coherent part.
  Complex target_aux;
};

class UnstableDriftError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Solves conj(A) N + N Aᵀ + D = 0 for the normally ordered covariance
/// N_ij = ⟨δx_i† δx_j⟩. Throws UnstableDriftError unless every drift
/// eigenvalue has a strictly negative real part.
SecondMoments steady_covariance(const LinearModel& model);

/// Moments at time t from mean x0 and normally ordered fluctuations n0,
/// integrating dN/dt = conj(A) N + N Aᵀ + D exactly. No stability needed.
SecondMoments moments_at(const LinearModel& model, const Eigen::Matrix2cd& n0,
                         const Eigen::Vector2cd& x0, double t);

/// Continuous Lyapunov solve A X + X Aᴴ + Q = 0 by Kronecker vectorization.
/// Small dense systems only.
Eigen::MatrixXcd solve_lyapunov(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& q);

struct OccupationFormula {
  /// (γ n_T/2)(λ−³/N−⁴ + 4λ−²λ+²/(κ N−² N+²) + λ+³/N+⁴), evaluated in
  /// complex arithmetic; the real part is reported.
  double value;
  /// Imaginary residue of the complex evaluation.
  double imaginary_part;
  bool complex_regime;
};

/// Closed-form RWA steady occupation with the middle-term "k" read as κ.
OccupationFormula occupation_formula(double gamma, double kappa, double g, double n_thermal);

}  // namespace freqconv
