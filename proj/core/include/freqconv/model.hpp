#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "freqconv/fock.hpp"

namespace freqconv {

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double boltzmann = 1.380649e-23;  // J / K
}  // namespace constants

/// Bose-Einstein occupation 1/(exp(ħν/kT) - 1). Zero at T = 0; throws for
/// T < 0 or ν <= 0.
double thermal_occupation(double angular_frequency, double temperature);

/// Simple steady-state cooling estimate [γ/(γ+κ)] n_T.
double estimate_cooling(double gamma, double kappa, double n_thermal);

struct Temperature {
  double kelvin;
};
struct Occupation {
  double n;
};
using Bath = std::variant<Temperature, Occupation>;

/// One oscillator. Rates and frequencies are angular (rad/s, 1/s).
struct ModeParams {
  double angular_frequency = 0.0;
  double damping_rate = 0.0;  ///< energy decay rate (γ or κ)
  Bath bath = Occupation{0.0};
  int truncation = 2;

  /// Bath occupation n_T, resolved from temperature when needed.
  double occupation() const;
  /// ω/γ; infinite for an undamped mode.
  double quality_factor() const;
};

enum class Frame { lab_modulated, interaction_full, interaction_rwa };

const char* to_string(Frame frame);
Frame parse_frame(const std::string& name);

struct CouplingParams {
  double g = 0.0;  ///< interaction rate, 1/s
  Frame frame = Frame::interaction_rwa;
  /// Lab frame only; defaults to Ω - ω and must equal it.
  std::optional<double> modulation_frequency;
};

/// Coherent drive on the auxiliary input, β in s^(-1/2).
struct DriveParams {
  Complex beta{0.0, 0.0};

  /// |β| = √(P/(ħΩ)) with the given phase.
  static DriveParams from_power(double watts, double carrier_angular_frequency,
                                double phase = 0.0);
};

/// A e^{iνt}.
struct Harmonic {
  Complex amplitude;
  double frequency;
};

/// op × Σ_k A_k e^{iν_k t}. A term with a single zero-frequency harmonic is
/// time independent.
struct HamiltonianTerm {
  ModeOperator op;
  std::vector<Harmonic> coefficient;

  Complex value(double t) const;
  bool constant() const;
};

/// Sum of HamiltonianTerms, in units of ħ (i.e. H/ħ, rad/s).
class TimeDependentOperator {
 public:
  TimeDependentOperator(FockSpace space, std::vector<HamiltonianTerm> terms);

  const FockSpace& space() const { return space_; }
  const std::vector<HamiltonianTerm>& terms() const { return terms_; }
  bool time_dependent() const;
  ModeOperator at(double t) const;
  /// Non-zero harmonic frequencies present, deduplicated by |ν|.
  std::vector<double> frequencies() const;

 private:
  FockSpace space_;
  std::vector<HamiltonianTerm> terms_;
};

/// Jump operator c with rate Γ; enters the master equation as √Γ c.
struct Dissipator {
  ModeOperator jump;
  double rate;
};

/// H/ħ of the coupled pair in the requested frame.
///
/// lab_modulated: ω a†a + Ω b†b + λ(t)(a + a†)(b + b†) with λ = 2g cos(Δt),
/// whose resonant part in the interaction picture is exactly g(ab† + a†b).
/// interaction_full: g(ab† + a†b) + g(ab e^{-2iωt} + a†b† e^{2iωt}).
/// interaction_rwa: g(ab† + a†b).
TimeDependentOperator build_hamiltonian(const FockSpace& space, const ModeParams& target,
                                        const ModeParams& aux, const CouplingParams& coupling);

/// i√κ(β b† - β* b), the displacement term whose Ehrenfest equation adds
/// +√κ β to d⟨b⟩/dt.
ModeOperator build_drive(const FockSpace& space, Complex beta, double kappa);

/// Assembled two-mode model. Immutable after construction.
class SystemModel {
 public:
  SystemModel(ModeParams target, ModeParams aux, CouplingParams coupling,
              DriveParams drive = {});

  const FockSpace& space() const { return space_; }
  const ModeParams& target() const { return target_; }
  const ModeParams& aux() const { return aux_; }
  const CouplingParams& coupling() const { return coupling_; }
  const DriveParams& drive() const { return drive_; }
  Frame frame() const { return coupling_.frame; }

  double target_occupation() const { return n_target_; }
  double aux_occupation() const { return n_aux_; }

  /// H(t)/ħ in the model's own frame (lab frame for lab_modulated).
  const TimeDependentOperator& hamiltonian() const { return hamiltonian_; }

  /// H(t)/ħ used by the integrators. Identical to hamiltonian() except in
  /// the lab frame, where it is the same dynamics written in the frame
  /// rotating with ω a†a + Ω b†b (no terms dropped).
  const TimeDependentOperator& propagation_hamiltonian() const { return propagation_; }

  /// Rotation (ω_a, ω_b) between the propagation frame and the reporting
  /// frame: ⟨a⟩_report = e^{-iω_a t} ⟨a⟩_prop. Zero except in the lab frame.
  std::pair<double, double> frame_rotation() const { return rotation_; }

  bool time_dependent() const { return propagation_.time_dependent(); }

  /// Exactly four channels: a, a†, b, b† with rates γ(n+1), γn, κ(n+1), κn.
  const std::vector<Dissipator>& dissipators() const { return dissipators_; }

  const ModeOperator& a() const { return a_; }
  const ModeOperator& b() const { return b_; }
  const ModeOperator& n_target() const { return n_a_; }
  const ModeOperator& n_aux() const { return n_b_; }

  /// Non-fatal diagnostics collected during construction (low Q, ...).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  ModeParams target_;
  ModeParams aux_;
  CouplingParams coupling_;
  DriveParams drive_;
  FockSpace space_;
  double n_target_;
  double n_aux_;
  ModeOperator a_;
  ModeOperator b_;
  ModeOperator n_a_;
  ModeOperator n_b_;
  TimeDependentOperator hamiltonian_;
  TimeDependentOperator propagation_;
  std::pair<double, double> rotation_{0.0, 0.0};
  std::vector<Dissipator> dissipators_;
  std::vector<std::string> warnings_;
};

}  // namespace freqconv
