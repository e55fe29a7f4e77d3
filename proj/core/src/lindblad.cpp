#include "freqconv/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace freqconv {

namespace {

constexpr Complex kI{0.0, 1.0};

double max_row_sum(const SparseOp& m) {
  double best = 0.0;
  for (int i = 0; i < m.outerSize(); ++i) {
    double sum = 0.0;
    for (SparseOp::InnerIterator it(m, i); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

/// √(‖M‖₁ ‖M‖∞) ≥ ‖M‖₂.
double norm_bound(const SparseOp& m) {
  const SparseOp t = m.transpose();
  return std::sqrt(max_row_sum(m) * max_row_sum(t));
}

double coefficient_bound(const HamiltonianTerm& term) {
  double sum = 0.0;
  for (const auto& h : term.coefficient) sum += std::abs(h.amplitude);
  return sum;
}

// Inner loops on interleaved (re, im) doubles. Written out so the compiler
// vectorizes them without the NaN-recovery path of std::complex products.

/// out[k] += c * x[k]
void axpy(Complex* out, Complex c, const Complex* x, Eigen::Index n) {
  auto* o = reinterpret_cast<double*>(out);
  const auto* v = reinterpret_cast<const double*>(x);
  const double cr = c.real(), ci = c.imag();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double xr = v[2 * k], xi = v[2 * k + 1];
    o[2 * k] += cr * xr - ci * xi;
    o[2 * k + 1] += cr * xi + ci * xr;
  }
}

/// out[k] += w[k] * x[k]
void mul_add(Complex* out, const Complex* w, const Complex* x, Eigen::Index n) {
  auto* o = reinterpret_cast<double*>(out);
  const auto* a = reinterpret_cast<const double*>(w);
  const auto* v = reinterpret_cast<const double*>(x);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double ar = a[2 * k], ai = a[2 * k + 1];
    const double xr = v[2 * k], xi = v[2 * k + 1];
    o[2 * k] += ar * xr - ai * xi;
    o[2 * k + 1] += ar * xi + ai * xr;
  }
}

/// out[k] += c * w[k] * x[k] with real c and w
void real_mul_add(Complex* out, double c, const double* w, const Complex* x, Eigen::Index n) {
  auto* o = reinterpret_cast<double*>(out);
  const auto* v = reinterpret_cast<const double*>(x);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double f = c * w[k];
    o[2 * k] += f * v[2 * k];
    o[2 * k + 1] += f * v[2 * k + 1];
  }
}

/// Fills the strict lower triangle with the conjugate of the upper one.
void mirror_upper(RhoMatrix& m) {
  constexpr Eigen::Index block = 32;
  const Eigen::Index n = m.rows();
  for (Eigen::Index r0 = 0; r0 < n; r0 += block) {
    for (Eigen::Index c0 = 0; c0 <= r0; c0 += block) {
      const Eigen::Index r1 = std::min(n, r0 + block);
      const Eigen::Index c1 = std::min(n, c0 + block);
      for (Eigen::Index r = r0; r < r1; ++r) {
        for (Eigen::Index c = c0; c < std::min(c1, r); ++c) m(r, c) = std::conj(m(c, r));
      }
    }
  }
}

}  // namespace

Liouvillian::BandedOp Liouvillian::to_bands(const SparseOp& op) {
  const int dim = static_cast<int>(op.rows());
  std::map<int, CVector> diagonals;
  for (int i = 0; i < op.outerSize(); ++i) {
    for (SparseOp::InnerIterator it(op, i); it; ++it) {
      if (it.value() == 0.0) continue;
      const int offset = static_cast<int>(it.col()) - i;
      auto [pos, fresh] = diagonals.try_emplace(offset);
      if (fresh) pos->second = CVector::Zero(dim);
      pos->second(i) = it.value();
    }
  }
  BandedOp bands;
  for (auto& [offset, coeff] : diagonals) {
    const int first = std::max(0, -offset);
    const int last = std::min(dim, dim - offset);
    CVector conj = coeff.conjugate();
    Eigen::VectorXd real = coeff.real();
    const bool is_real = coeff.imag().isZero(0.0);
    bands.push_back(
        Band{offset, std::move(coeff), std::move(conj), std::move(real), is_real, first, last});
  }
  return bands;
}

void Liouvillian::add_sandwich(const BandedOp& op, const RhoMatrix& rho, int row,
                               RhoMatrix& out) {
  // (BρB†)_ij = Σ_{d,e} B_{i, i+d} ρ_{i+d, j+e} conj(B_{j, j+e}), for j >= row
  Complex* target = out.data() + static_cast<Eigen::Index>(row) * out.cols();
  for (const Band& left : op) {
    if (row < left.first || row >= left.last) continue;
    const Complex c = left.coeff(row);
    if (c == 0.0) continue;
    const Complex* source = rho.data() + static_cast<Eigen::Index>(row + left.offset) * rho.cols();
    for (const Band& right : op) {
      const int first = std::max(right.first, row);
      const Eigen::Index len = right.last - first;
      if (len <= 0) continue;
      if (left.real && right.real) {
        real_mul_add(target + first, c.real(), right.coeff_real.data() + first,
                     source + first + right.offset, len);
      } else {
        const CVector w = c * right.coeff_conj.segment(first, len);
        mul_add(target + first, w.data(), source + first + right.offset, len);
      }
    }
  }
}

Liouvillian::Liouvillian(const SystemModel& model) : space_(model.space()) {
  const int dim = space_.joint_dim();
  SparseOp static_h(dim, dim);
  double hamiltonian_bound = 0.0;
  for (const auto& term : model.propagation_hamiltonian().terms()) {
    if (term.constant()) {
      static_h += term.value(0.0) * term.op.matrix();
    } else {
      varying_.push_back(VaryingTerm{term.op.matrix(), to_bands(term.op.matrix()), term});
      hamiltonian_bound += coefficient_bound(term) * norm_bound(term.op.matrix());
    }
  }
  hamiltonian_bound += norm_bound(static_h);

  SparseOp decay(dim, dim);
  double jump_bound = 0.0;
  const auto& dissipators = model.dissipators();
  for (std::size_t k = 0; k < dissipators.size(); ++k) {
    const double rate = dissipators[k].rate;
    if (rate <= 0.0) continue;
    SparseOp jump = std::sqrt(rate) * dissipators[k].jump.matrix();
    SparseOp jdj = SparseOp(jump.adjoint()) * jump;
    decay += jdj;
    jump_bound += norm_bound(jdj);
    jump_bands_.push_back(to_bands(jump));
    jumps_.push_back(std::move(jump));
    jump_channels_.push_back(static_cast<int>(k));
  }
  static_effective_ = static_h - Complex{0.0, 0.5} * decay;
  static_effective_.makeCompressed();
  static_bands_ = to_bands(static_effective_);

  effective_bound_ = hamiltonian_bound + 0.5 * jump_bound;
  rate_bound_ = 2.0 * hamiltonian_bound + 2.0 * jump_bound;
  frequencies_ = model.propagation_hamiltonian().frequencies();
}

SparseOp Liouvillian::effective_hamiltonian(double t) const {
  SparseOp h = static_effective_;
  for (const auto& term : varying_) {
    const Complex c = term.coefficient.value(t);
    if (c != 0.0) h += c * term.op;
  }
  return h;
}

void Liouvillian::apply(double t, const RhoMatrix& rho, RhoMatrix& out) const {
  // -i H_eff ρ + i ρ H_eff† + Σ L ρ L†, one output row at a time so each
  // row of `out` is written once while it is in cache.
  struct Scaled {
    const Band* band;
    Complex scale;      ///< left factor, multiplies B
    CVector right;      ///< conj(scale) conj(B_{j, j+d}) over j
  };
  std::vector<Scaled> terms;
  terms.reserve(static_bands_.size() + 2 * varying_.size());
  auto push = [&terms](const Band& band, Complex scale) {
    terms.push_back({&band, scale, std::conj(scale) * band.coeff_conj});
  };
  for (const Band& band : static_bands_) push(band, -kI);
  for (const auto& term : varying_) {
    const Complex c = term.coefficient.value(t);
    if (c == 0.0) continue;
    for (const Band& band : term.bands) push(band, -kI * c);
  }

  // Only the upper triangle (j >= i) is computed; the result is Hermitian.
  out.resize(rho.rows(), rho.cols());
  const Eigen::Index dim = rho.cols();
  for (int i = 0; i < rho.rows(); ++i) {
    Complex* target = out.data() + i * dim;
    std::fill(target + i, target + dim, Complex{});
    const Complex* own = rho.data() + i * dim;
    for (const auto& term : terms) {
      const Band& band = *term.band;
      if (i >= band.first && i < band.last) {
        const Complex c = term.scale * band.coeff(i);
        if (c != 0.0) {
          axpy(target + i, c, rho.data() + (i + band.offset) * dim + i, dim - i);
        }
      }
      // (ρB†)_ij = Σ_d ρ_{i, j+d} conj(B_{j, j+d})
      const int first = std::max(band.first, i);
      if (band.last > first) {
        mul_add(target + first, term.right.data() + first, own + first + band.offset,
                band.last - first);
      }
    }
    for (const auto& jump : jump_bands_) add_sandwich(jump, rho, i, out);
    target[i] = target[i].real();
  }
  mirror_upper(out);
}

void Liouvillian::apply_effective(double t, const CVector& psi, CVector& out) const {
  out.noalias() = static_effective_ * psi;
  for (const auto& term : varying_) {
    const Complex c = term.coefficient.value(t);
    if (c != 0.0) out.noalias() += c * (term.op * psi);
  }
  out *= -kI;
}

double suggest_step(const Liouvillian& liouvillian) {
  double dt = std::numeric_limits<double>::infinity();
  if (liouvillian.rate_bound() > 0.0) dt = 2.5 / liouvillian.rate_bound();
  for (double f : liouvillian.frequencies()) {
    dt = std::min(dt, 2.0 * constants::pi / f / 40.0);
  }
  return dt;
}

void record_observables(const SystemModel& model, const RhoMatrix& rho, double t,
                        ObservableSeries& series) {
  const auto [wa, wb] = model.frame_rotation();
  Complex a = trace_product(rho, model.a().matrix());
  Complex b = trace_product(rho, model.b().matrix());
  if (wa != 0.0) a *= std::polar(1.0, -wa * t);
  if (wb != 0.0) b *= std::polar(1.0, -wb * t);
  series.times.push_back(t);
  series.n_target.push_back(trace_product(rho, model.n_target().matrix()).real());
  series.n_aux.push_back(trace_product(rho, model.n_aux().matrix()).real());
  series.a.push_back(a);
  series.b.push_back(b);
  series.trace.push_back(rho.trace().real());
}

namespace {

double min_eigenvalue(const RhoMatrix& rho) {
  const CMatrix herm = 0.5 * (CMatrix(rho) + CMatrix(rho.adjoint()));
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

PropagationResult integrate(const SystemModel& model, const Liouvillian& liouvillian,
                            const RhoMatrix& rho0, double t_final, double dt_goal,
                            const PropagationOptions& options) {
  const int intervals = options.samples - 1;
  const double interval = t_final / intervals;
  const double ratio = std::ceil(interval / dt_goal * (1.0 - 1e-12));
  if (!(ratio >= 1.0) || ratio * intervals > static_cast<double>(options.max_steps)) {
    std::ostringstream msg;
    msg << "propagate: step-size underflow (dt " << dt_goal << " over t_final " << t_final
        << " needs more than " << options.max_steps << " steps)";
    throw PropagationError(msg.str());
  }
  const long long substeps = static_cast<long long>(ratio);
  const double h = interval / static_cast<double>(substeps);

  RhoMatrix rho = rho0;
  RhoMatrix k1(rho.rows(), rho.cols()), k2(k1), k3(k1), k4(k1), stage(k1);

  PropagationResult result{ObservableSeries{}, DensityOperator(CMatrix(rho0)), h,
                           substeps * intervals, std::nullopt, 0};
  auto& obs = result.observables;
  const auto reserve = static_cast<std::size_t>(options.samples);
  obs.times.reserve(reserve);
  obs.n_target.reserve(reserve);
  obs.n_aux.reserve(reserve);
  obs.a.reserve(reserve);
  obs.b.reserve(reserve);
  obs.trace.reserve(reserve);

  double lowest = std::numeric_limits<double>::infinity();
  auto sample = [&](double t) {
    record_observables(model, rho, t, obs);
    const double drift = std::abs(obs.trace.back() - 1.0);
    if (!(drift <= options.trace_tolerance)) {
      std::ostringstream msg;
      msg << "propagate: trace drifted to " << obs.trace.back() << " at t = " << t
          << " s (dt = " << h << " s); reduce the step";
      throw PropagationError(msg.str());
    }
    if (options.check_positivity) lowest = std::min(lowest, min_eigenvalue(rho));
  };

  sample(0.0);
  long long step = 0;
  for (int s = 0; s < intervals; ++s) {
    for (long long sub = 0; sub < substeps; ++sub, ++step) {
      const double t = static_cast<double>(step) * h;
      liouvillian.apply(t, rho, k1);
      stage.noalias() = rho + (0.5 * h) * k1;
      liouvillian.apply(t + 0.5 * h, stage, k2);
      stage.noalias() = rho + (0.5 * h) * k2;
      liouvillian.apply(t + 0.5 * h, stage, k3);
      stage.noalias() = rho + h * k3;
      liouvillian.apply(t + h, stage, k4);
      rho.noalias() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    sample(s + 1 == intervals ? t_final : static_cast<double>(step) * h);
  }

  CMatrix final_rho = 0.5 * (CMatrix(rho) + CMatrix(rho.adjoint()));
  final_rho /= final_rho.trace();
  result.final_state = DensityOperator(std::move(final_rho));
  if (options.check_positivity) result.min_eigenvalue = lowest;
  return result;
}

double series_change(const ObservableSeries& coarse, const ObservableSeries& fine) {
  double change = 0.0;
  auto compare = [&change](const auto& x, const auto& y) {
    double scale = 0.0;
    for (const auto& v : y) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return;
    for (std::size_t i = 0; i < x.size(); ++i) {
      change = std::max(change, std::abs(x[i] - y[i]) / scale);
    }
  };
  compare(coarse.n_target, fine.n_target);
  compare(coarse.n_aux, fine.n_aux);
  compare(coarse.a, fine.a);
  compare(coarse.b, fine.b);
  return change;
}

}  // namespace

PropagationResult propagate(const SystemModel& model, const DensityOperator& rho0,
                            double t_final, const PropagationOptions& options) {
  if (rho0.dim() != model.space().joint_dim()) {
    throw std::invalid_argument("propagate: initial state does not match the model space");
  }
  if (!(t_final > 0.0)) throw std::invalid_argument("propagate: t_final must be > 0");
  if (options.samples < 2) throw std::invalid_argument("propagate: need at least 2 samples");

  const Liouvillian liouvillian(model);
  const RhoMatrix start = rho0.matrix();

  if (options.dt) {
    const double dt = *options.dt;
    if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be > 0");
    for (double f : liouvillian.frequencies()) {
      const double period = 2.0 * constants::pi / f;
      if (dt > period / 20.0) {
        std::ostringstream msg;
        msg << "propagate: dt = " << dt << " s does not resolve the period " << period
            << " s of the explicit time dependence with 20 steps";
        throw std::invalid_argument(msg.str());
      }
    }
    return integrate(model, liouvillian, start, t_final, dt, options);
  }

  double dt = suggest_step(liouvillian);
  if (!std::isfinite(dt)) dt = t_final / (options.samples - 1);
  if (!options.refine) return integrate(model, liouvillian, start, t_final, dt, options);

  // Step selection on a pilot covering the first tenth of the sample grid;
  // the fastest transients sit at the start of every run this serves.
  const int intervals = options.samples - 1;
  const int pilot_intervals = std::max(2, intervals / 10);
  PropagationOptions pilot = options;
  pilot.samples = std::min(intervals, pilot_intervals) + 1;
  const double pilot_t = t_final * (pilot.samples - 1) / intervals;
  PropagationResult current = integrate(model, liouvillian, start, pilot_t, dt, pilot);
  int refinements = 0;
  for (int r = 0; r < options.max_refinements; ++r) {
    PropagationResult finer =
        integrate(model, liouvillian, start, pilot_t, 0.5 * current.dt, pilot);
    const double change = series_change(current.observables, finer.observables);
    current = std::move(finer);
    refinements = r + 1;
    if (change < options.refine_tolerance) break;
  }
  if (pilot.samples == options.samples) {
    current.refinements = refinements;
    return current;
  }
  PropagationResult result = integrate(model, liouvillian, start, t_final, current.dt, options);
  result.refinements = refinements;
  return result;
}

}  // namespace freqconv
