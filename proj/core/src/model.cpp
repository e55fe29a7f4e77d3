#include "freqconv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace freqconv {

double thermal_occupation(double angular_frequency, double temperature) {
  if (!(angular_frequency > 0.0)) {
    throw std::invalid_argument("thermal_occupation: frequency must be positive");
  }
  if (temperature < 0.0 || std::isnan(temperature)) {
    throw std::invalid_argument("thermal_occupation: temperature must be >= 0");
  }
  if (temperature == 0.0) return 0.0;
  const double x = constants::hbar * angular_frequency / (constants::boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double estimate_cooling(double gamma, double kappa, double n_thermal) {
  if (gamma < 0.0 || kappa < 0.0) {
    throw std::invalid_argument("estimate_cooling: rates must be >= 0");
  }
  if (gamma == 0.0 && kappa == 0.0) {
    throw std::invalid_argument("estimate_cooling: gamma and kappa cannot both be zero");
  }
  return gamma / (gamma + kappa) * n_thermal;
}

double ModeParams::occupation() const {
  return std::visit(
      [this](const auto& bath) -> double {
        using T = std::decay_t<decltype(bath)>;
        if constexpr (std::is_same_v<T, Temperature>) {
          return thermal_occupation(angular_frequency, bath.kelvin);
        } else {
          if (!(bath.n >= 0.0)) throw std::invalid_argument("bath occupation must be >= 0");
          return bath.n;
        }
      },
      bath);
}

double ModeParams::quality_factor() const {
  return damping_rate > 0.0 ? angular_frequency / damping_rate
                            : std::numeric_limits<double>::infinity();
}

const char* to_string(Frame frame) {
  switch (frame) {
    case Frame::lab_modulated: return "lab_modulated";
    case Frame::interaction_full: return "interaction_full";
    case Frame::interaction_rwa: return "interaction_rwa";
  }
  return "?";
}

Frame parse_frame(const std::string& name) {
  if (name == "lab_modulated") return Frame::lab_modulated;
  if (name == "interaction_full") return Frame::interaction_full;
  if (name == "interaction_rwa") return Frame::interaction_rwa;
  throw std::invalid_argument("unknown frame '" + name + "'");
}

DriveParams DriveParams::from_power(double watts, double carrier_angular_frequency,
                                    double phase) {
  if (watts < 0.0 || !(carrier_angular_frequency > 0.0)) {
    throw std::invalid_argument("DriveParams::from_power: need P >= 0 and Omega > 0");
  }
  const double magnitude = std::sqrt(watts / (constants::hbar * carrier_angular_frequency));
  return DriveParams{std::polar(magnitude, phase)};
}

Complex HamiltonianTerm::value(double t) const {
  Complex sum = 0.0;
  for (const auto& h : coefficient) {
    sum += h.frequency == 0.0 ? h.amplitude : h.amplitude * std::polar(1.0, h.frequency * t);
  }
  return sum;
}

bool HamiltonianTerm::constant() const {
  return std::all_of(coefficient.begin(), coefficient.end(),
                     [](const Harmonic& h) { return h.frequency == 0.0; });
}

TimeDependentOperator::TimeDependentOperator(FockSpace space, std::vector<HamiltonianTerm> terms)
    : space_(space), terms_(std::move(terms)) {
  for (const auto& term : terms_) {
    if (!(term.op.space() == space_)) {
      throw std::invalid_argument("TimeDependentOperator: term on a different space");
    }
  }
}

bool TimeDependentOperator::time_dependent() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const HamiltonianTerm& t) { return !t.constant(); });
}

ModeOperator TimeDependentOperator::at(double t) const {
  SparseOp sum(space_.joint_dim(), space_.joint_dim());
  for (const auto& term : terms_) {
    const Complex c = term.value(t);
    if (c != 0.0) sum += c * term.op.matrix();
  }
  return ModeOperator(space_, std::move(sum), "H(t)");
}

std::vector<double> TimeDependentOperator::frequencies() const {
  std::vector<double> out;
  for (const auto& term : terms_) {
    for (const auto& h : term.coefficient) {
      const double f = std::abs(h.frequency);
      if (f == 0.0) continue;
      const bool seen = std::any_of(out.begin(), out.end(), [f](double g) {
        return std::abs(g - f) <= 1e-12 * f;
      });
      if (!seen) out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void check_mode(const ModeParams& mode, const char* name) {
  if (!(mode.angular_frequency > 0.0)) {
    throw std::invalid_argument(std::string(name) + ": angular frequency must be > 0");
  }
  if (!(mode.damping_rate >= 0.0)) {
    throw std::invalid_argument(std::string(name) + ": damping rate must be >= 0");
  }
  if (mode.truncation < 2) {
    throw std::invalid_argument(std::string(name) + ": truncation must be >= 2");
  }
}

double modulation_frequency(const ModeParams& target, const ModeParams& aux,
                            const CouplingParams& coupling) {
  const double delta = aux.angular_frequency - target.angular_frequency;
  if (coupling.modulation_frequency) {
    const double given = *coupling.modulation_frequency;
    if (std::abs(given - delta) > 1e-12 * std::max(std::abs(delta), 1.0)) {
      throw std::invalid_argument(
          "lab_modulated frame requires modulation frequency Delta = Omega - omega");
    }
  }
  return delta;
}

HamiltonianTerm constant_term(ModeOperator op, Complex value) {
  return HamiltonianTerm{std::move(op), {Harmonic{value, 0.0}}};
}

}  // namespace

TimeDependentOperator build_hamiltonian(const FockSpace& space, const ModeParams& target,
                                        const ModeParams& aux, const CouplingParams& coupling) {
  if (!(coupling.g >= 0.0)) throw std::invalid_argument("coupling g must be >= 0");
  const double g = coupling.g;
  const double w = target.angular_frequency;
  const ModeOperator a = annihilation(space, Mode::target);
  const ModeOperator b = annihilation(space, Mode::aux);
  const ModeOperator ad = a.adjoint();
  const ModeOperator bd = b.adjoint();

  std::vector<HamiltonianTerm> terms;
  switch (coupling.frame) {
    case Frame::lab_modulated: {
      const double delta = modulation_frequency(target, aux, coupling);
      terms.push_back(constant_term(number(space, Mode::target), w));
      terms.push_back(constant_term(number(space, Mode::aux), aux.angular_frequency));
      ModeOperator x = (a + ad) * (b + bd);
      x = ModeOperator(space, x.matrix(), "(a + a^dag)(b + b^dag)", true);
      // 2g cos(Δt) = g e^{iΔt} + g e^{-iΔt}
      terms.push_back(HamiltonianTerm{std::move(x), {{g, delta}, {g, -delta}}});
      break;
    }
    case Frame::interaction_full:
      terms.push_back(constant_term(a * bd + ad * b, g));
      terms.push_back(HamiltonianTerm{a * b, {{g, -2.0 * w}}});
      terms.push_back(HamiltonianTerm{ad * bd, {{g, 2.0 * w}}});
      break;
    case Frame::interaction_rwa:
      terms.push_back(constant_term(a * bd + ad * b, g));
      break;
  }
  return TimeDependentOperator(space, std::move(terms));
}

ModeOperator build_drive(const FockSpace& space, Complex beta, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("build_drive: kappa must be > 0");
  const ModeOperator b = annihilation(space, Mode::aux);
  const Complex i{0.0, 1.0};
  const Complex c = i * std::sqrt(kappa) * beta;
  SparseOp m = c * b.adjoint().matrix() + std::conj(c) * b.matrix();
  return ModeOperator(space, std::move(m), "i sqrt(kappa)(beta b^dag - beta* b)", true);
}

namespace {

/// The lab-frame dynamics rewritten in the frame rotating with
/// ω a†a + Ω b†b. Every product of ladder operators picks up the phase of
/// its free evolution; nothing is discarded.
std::vector<HamiltonianTerm> lab_terms_in_rotating_frame(const FockSpace& space,
                                                         const ModeParams& target,
                                                         const ModeParams& aux,
                                                         const CouplingParams& coupling,
                                                         const DriveParams& drive) {
  const double g = coupling.g;
  const double w = target.angular_frequency;
  const double big_w = aux.angular_frequency;
  const double delta = modulation_frequency(target, aux, coupling);
  const ModeOperator a = annihilation(space, Mode::target);
  const ModeOperator b = annihilation(space, Mode::aux);
  const ModeOperator ad = a.adjoint();
  const ModeOperator bd = b.adjoint();

  // a -> a e^{-iωt}, b -> b e^{-iΩt}; each product also carries g e^{±iΔt}.
  auto modulated = [&](ModeOperator op, double free_phase) {
    return HamiltonianTerm{std::move(op), {{g, free_phase + delta}, {g, free_phase - delta}}};
  };
  std::vector<HamiltonianTerm> terms;
  terms.push_back(modulated(a * b, -(w + big_w)));
  terms.push_back(modulated(ad * bd, w + big_w));
  terms.push_back(modulated(a * bd, big_w - w));
  terms.push_back(modulated(ad * b, w - big_w));
  if (drive.beta != Complex{}) {
    terms.push_back(constant_term(build_drive(space, drive.beta, aux.damping_rate), 1.0));
  }
  return terms;
}

}  // namespace

SystemModel::SystemModel(ModeParams target, ModeParams aux, CouplingParams coupling,
                         DriveParams drive)
    : target_(std::move(target)),
      aux_(std::move(aux)),
      coupling_(std::move(coupling)),
      drive_(drive),
      space_((check_mode(target_, "target"), target_.truncation),
             (check_mode(aux_, "aux"), aux_.truncation)),
      n_target_(target_.occupation()),
      n_aux_(aux_.occupation()),
      a_(annihilation(space_, Mode::target)),
      b_(annihilation(space_, Mode::aux)),
      n_a_(number(space_, Mode::target)),
      n_b_(number(space_, Mode::aux)),
      hamiltonian_(build_hamiltonian(space_, target_, aux_, coupling_)),
      propagation_(hamiltonian_) {
  const bool driven = drive_.beta != Complex{};
  if (driven) {
    if (!(aux_.damping_rate > 0.0)) {
      throw std::invalid_argument("a drive on the auxiliary requires kappa > 0");
    }
    std::vector<HamiltonianTerm> terms = hamiltonian_.terms();
    if (coupling_.frame == Frame::lab_modulated) {
      // Drive at the carrier Ω in the lab frame.
      const Complex c = Complex{0.0, 1.0} * std::sqrt(aux_.damping_rate) * drive_.beta;
      terms.push_back(HamiltonianTerm{b_.adjoint(), {{c, -aux_.angular_frequency}}});
      terms.push_back(HamiltonianTerm{b_, {{std::conj(c), aux_.angular_frequency}}});
    } else {
      terms.push_back(
          constant_term(build_drive(space_, drive_.beta, aux_.damping_rate), 1.0));
    }
    hamiltonian_ = TimeDependentOperator(space_, std::move(terms));
    propagation_ = hamiltonian_;
  }
  if (coupling_.frame == Frame::lab_modulated) {
    propagation_ = TimeDependentOperator(
        space_, lab_terms_in_rotating_frame(space_, target_, aux_, coupling_, drive_));
    rotation_ = {target_.angular_frequency, aux_.angular_frequency};
  }

  const double gamma = target_.damping_rate;
  const double kappa = aux_.damping_rate;
  dissipators_ = {
      Dissipator{a_, gamma * (n_target_ + 1.0)},
      Dissipator{a_.adjoint(), gamma * n_target_},
      Dissipator{b_, kappa * (n_aux_ + 1.0)},
      Dissipator{b_.adjoint(), kappa * n_aux_},
  };

  for (const auto* mode : {&target_, &aux_}) {
    if (mode->quality_factor() < 10.0) {
      warnings_.push_back(std::string(mode == &target_ ? "target" : "aux") +
                          " quality factor below 10; the optical master equation is "
                          "not accurate there");
    }
  }
}

}  // namespace freqconv
