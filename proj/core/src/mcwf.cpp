#include "freqconv/mcwf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "trajectory.hpp"

namespace freqconv {

const char* to_string(Unraveling unraveling) {
  switch (unraveling) {
    case Unraveling::jumps: return "jumps";
    case Unraveling::diffusion: return "diffusion";
  }
  return "?";
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  engine_.seed(seq);
}

double TrajectoryRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double TrajectoryRng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = uniform_open_low();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * constants::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

int sample_index(const Eigen::VectorXd& cumulative, double u) {
  const double target = u * cumulative(cumulative.size() - 1);
  for (Eigen::Index k = 0; k < cumulative.size(); ++k) {
    if (target < cumulative(k)) return static_cast<int>(k);
  }
  return static_cast<int>(cumulative.size() - 1);
}

namespace {

Eigen::VectorXd cumulative_populations(int dim, double n_occ) {
  Eigen::VectorXd p = thermal_populations(dim, n_occ);
  for (Eigen::Index k = 1; k < p.size(); ++k) p(k) += p(k - 1);
  return p;
}

}  // namespace

JointState sample_initial(const FockSpace& space, const ThermalSpec& spec, TrajectoryRng& rng) {
  const int na = sample_index(cumulative_populations(space.dim_target(), spec.n_target),
                              rng.uniform());
  const int nb = sample_index(cumulative_populations(space.dim_aux(), spec.n_aux), rng.uniform());
  return JointState::fock(space, na, nb);
}

namespace detail {

void TrajectoryRecord::reset(int samples, std::size_t channels) {
  const auto n = static_cast<std::size_t>(samples);
  n_target.assign(n, 0.0);
  n_aux.assign(n, 0.0);
  a.assign(n, Complex{});
  b.assign(n, Complex{});
  jumps = 0;
  channel_jumps.assign(channels, 0);
}

namespace {

Complex sandwich(const CVector& psi, const SparseOp& op) {
  return psi.dot(op * psi);
}

}  // namespace

void record_ket(const TrajectoryContext& ctx, const CVector& psi, double t, int sample,
                TrajectoryRecord& record) {
  const double norm2 = psi.squaredNorm();
  const SystemModel& m = ctx.model;
  const auto [wa, wb] = m.frame_rotation();
  Complex a = sandwich(psi, m.a().matrix()) / norm2;
  Complex b = sandwich(psi, m.b().matrix()) / norm2;
  if (wa != 0.0) a *= std::polar(1.0, -wa * t);
  if (wb != 0.0) b *= std::polar(1.0, -wb * t);
  const auto s = static_cast<std::size_t>(sample);
  record.n_target[s] = sandwich(psi, m.n_target().matrix()).real() / norm2;
  record.n_aux[s] = sandwich(psi, m.n_aux().matrix()).real() / norm2;
  record.a[s] = a;
  record.b[s] = b;
}

namespace {

struct KetStepper {
  const Liouvillian& liouvillian;
  CVector k1, k2, k3, k4, stage;

  /// One RK4 step of dψ/dt = -i H_eff ψ.
  void step(const CVector& psi, double t, double h, CVector& out) {
    liouvillian.apply_effective(t, psi, k1);
    stage.noalias() = psi + (0.5 * h) * k1;
    liouvillian.apply_effective(t + 0.5 * h, stage, k2);
    stage.noalias() = psi + (0.5 * h) * k2;
    liouvillian.apply_effective(t + 0.5 * h, stage, k3);
    stage.noalias() = psi + h * k3;
    liouvillian.apply_effective(t + h, stage, k4);
    out.noalias() = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

[[noreturn]] void norm_failure(double t, double norm2, double h) {
  std::ostringstream msg;
  msg << "run_ensemble: trajectory norm " << norm2 << " at t = " << t
      << " s left (1e-12, previous norm]; step " << h << " s is too large";
  throw TrajectoryError(msg.str());
}

class JumpIntegrator {
 public:
  JumpIntegrator(const TrajectoryContext& ctx, TrajectoryRng& rng, TrajectoryRecord& record)
      : ctx_(ctx), rng_(rng), record_(record), stepper_{ctx.liouvillian, {}, {}, {}, {}, {}} {}

  void run(CVector psi) {
    threshold_ = rng_.uniform_open_low();
    record_ket(ctx_, psi, 0.0, 0, record_);
    long long step = 0;
    for (int s = 0; s < ctx_.intervals; ++s) {
      for (long long sub = 0; sub < ctx_.substeps; ++sub, ++step) {
        const double t0 = static_cast<double>(step) * ctx_.step;
        advance(psi, t0, t0 + ctx_.step);
      }
      const double t = s + 1 == ctx_.intervals ? ctx_.t_final
                                               : static_cast<double>(step) * ctx_.step;
      record_ket(ctx_, psi, t, s + 1, record_);
    }
  }

 private:
  /// Integrates psi from ta to tb, performing every jump whose norm
  /// threshold is crossed on the way.
  void advance(CVector& psi, double ta, double tb) {
    while (ta < tb) {
      const double h = tb - ta;
      const double before = psi.squaredNorm();
      stepper_.step(psi, ta, h, trial_);
      const double after = trial_.squaredNorm();
      check(after, before, ta + h, h);
      if (after > threshold_) {
        psi.swap(trial_);
        return;
      }
      // Bisect for the crossing time within this step.
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper_.step(psi, ta, mid * h, probe_);
        const double n2 = probe_.squaredNorm();
        if (n2 > threshold_) {
          lo = mid;
        } else {
          hi = mid;
          trial_.swap(probe_);
          if (threshold_ - n2 <= 1e-10 * threshold_) break;
        }
      }
      // trial_ holds the state at the earliest evaluated point below threshold.
      const double tj = ta + hi * h;
      psi.swap(trial_);
      jump(psi);
      threshold_ = rng_.uniform_open_low();
      ta = tj;
    }
  }

  void check(double after, double before, double t, double h) const {
    if (!std::isfinite(after) || after > before * (1.0 + 1e-8) || after < 1e-12) {
      norm_failure(t, after, h);
    }
  }

  void jump(CVector& psi) {
    const auto& jumps = ctx_.liouvillian.jumps();
    weights_.resize(static_cast<Eigen::Index>(jumps.size()));
    double total = 0.0;
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      total += (jumps[k] * psi).squaredNorm();
      weights_(static_cast<Eigen::Index>(k)) = total;
    }
    if (!(total > 0.0)) {
      throw TrajectoryError("run_ensemble: norm decayed but every jump channel has zero weight");
    }
    const int k = sample_index(weights_, rng_.uniform());
    trial_.noalias() = jumps[static_cast<std::size_t>(k)] * psi;
    psi.swap(trial_);
    psi /= psi.norm();
    ++record_.jumps;
    ++record_.channel_jumps[static_cast<std::size_t>(
        ctx_.liouvillian.jump_channels()[static_cast<std::size_t>(k)])];
  }

  const TrajectoryContext& ctx_;
  TrajectoryRng& rng_;
  TrajectoryRecord& record_;
  KetStepper stepper_;
  CVector trial_, probe_;
  Eigen::VectorXd weights_;
  double threshold_ = 1.0;
};

}  // namespace

void run_jump_trajectory(const TrajectoryContext& ctx, CVector psi, TrajectoryRng& rng,
                         TrajectoryRecord& record) {
  JumpIntegrator(ctx, rng, record).run(std::move(psi));
}

}  // namespace detail

namespace {

constexpr int kBlockSize = 64;

/// Sums over one block of trajectories, accumulated in index order.
struct BlockSums {
  std::vector<double> n_target, n_target_sq, n_aux, n_aux_sq, re_a_sq, im_a_sq;
  std::vector<Complex> a, b;
  std::vector<long long> channel_jumps;

  void reset(int samples, std::size_t channels) {
    const auto n = static_cast<std::size_t>(samples);
    for (auto* v : {&n_target, &n_target_sq, &n_aux, &n_aux_sq, &re_a_sq, &im_a_sq}) {
      v->assign(n, 0.0);
    }
    a.assign(n, Complex{});
    b.assign(n, Complex{});
    channel_jumps.assign(channels, 0);
  }

  void add(const detail::TrajectoryRecord& r) {
    for (std::size_t s = 0; s < n_target.size(); ++s) {
      n_target[s] += r.n_target[s];
      n_target_sq[s] += r.n_target[s] * r.n_target[s];
      n_aux[s] += r.n_aux[s];
      n_aux_sq[s] += r.n_aux[s] * r.n_aux[s];
      a[s] += r.a[s];
      re_a_sq[s] += r.a[s].real() * r.a[s].real();
      im_a_sq[s] += r.a[s].imag() * r.a[s].imag();
      b[s] += r.b[s];
    }
    for (std::size_t k = 0; k < channel_jumps.size(); ++k) channel_jumps[k] += r.channel_jumps[k];
  }

  void add(const BlockSums& o) {
    for (std::size_t s = 0; s < n_target.size(); ++s) {
      n_target[s] += o.n_target[s];
      n_target_sq[s] += o.n_target_sq[s];
      n_aux[s] += o.n_aux[s];
      n_aux_sq[s] += o.n_aux_sq[s];
      a[s] += o.a[s];
      re_a_sq[s] += o.re_a_sq[s];
      im_a_sq[s] += o.im_a_sq[s];
      b[s] += o.b[s];
    }
    for (std::size_t k = 0; k < channel_jumps.size(); ++k) channel_jumps[k] += o.channel_jumps[k];
  }
};

double standard_error(double sum, double sum_sq, int n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
  return std::sqrt(var / n);
}

double default_step(const Liouvillian& liouvillian, Unraveling unraveling) {
  double dt = std::numeric_limits<double>::infinity();
  if (liouvillian.effective_norm_bound() > 0.0) dt = 1.0 / liouvillian.effective_norm_bound();
  for (double f : liouvillian.frequencies()) dt = std::min(dt, 2.0 * constants::pi / f / 40.0);
  if (unraveling == Unraveling::diffusion) dt *= 0.1;
  return dt;
}

CVector initial_ket(const SystemModel& model, const InitialCondition& initial,
                    TrajectoryRng& rng) {
  if (const auto* psi = std::get_if<JointState>(&initial)) {
    CVector v = psi->amplitudes();
    return v / v.norm();
  }
  return sample_initial(model.space(), std::get<ThermalSpec>(initial), rng).amplitudes();
}

}  // namespace

EnsembleResult run_ensemble(const SystemModel& model, const InitialCondition& initial,
                            const TrajectoryConfig& config) {
  if (config.n_trajectories < 1) {
    throw std::invalid_argument("run_ensemble: n_trajectories must be >= 1");
  }
  if (!(config.t_final > 0.0)) throw std::invalid_argument("run_ensemble: t_final must be > 0");
  if (config.samples < 2) throw std::invalid_argument("run_ensemble: need at least 2 samples");
  if (const auto* psi = std::get_if<JointState>(&initial)) {
    if (!(psi->space() == model.space())) {
      throw std::invalid_argument("run_ensemble: initial state does not match the model space");
    }
    if (!(psi->norm_squared() > 0.0)) {
      throw std::invalid_argument("run_ensemble: initial state has zero norm");
    }
  }

  const Liouvillian liouvillian(model);
  double dt_goal = config.dt ? *config.dt : default_step(liouvillian, config.unraveling);
  if (!(dt_goal > 0.0)) throw std::invalid_argument("run_ensemble: dt must be > 0");
  const int intervals = config.samples - 1;
  const double interval = config.t_final / intervals;
  if (!std::isfinite(dt_goal)) dt_goal = interval;
  const auto substeps =
      static_cast<long long>(std::max(1.0, std::ceil(interval / dt_goal * (1.0 - 1e-12))));
  const detail::TrajectoryContext ctx{model,     liouvillian, interval / substeps,
                                      substeps,  intervals,   config.t_final};

  const std::size_t channels = model.dissipators().size();
  const int n = config.n_trajectories;
  const int blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> block_sums(static_cast<std::size_t>(blocks));
  std::vector<long long> jump_counts(static_cast<std::size_t>(n), 0);

  std::atomic<int> next_block{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    detail::TrajectoryRecord record;
    try {
      for (int blk = next_block++; blk < blocks && !failed; blk = next_block++) {
        BlockSums& sums = block_sums[static_cast<std::size_t>(blk)];
        sums.reset(config.samples, channels);
        const int end = std::min(n, (blk + 1) * kBlockSize);
        for (int i = blk * kBlockSize; i < end; ++i) {
          TrajectoryRng rng(config.seed, static_cast<std::uint64_t>(i));
          record.reset(config.samples, channels);
          CVector psi = initial_ket(model, initial, rng);
          if (config.unraveling == Unraveling::jumps) {
            detail::run_jump_trajectory(ctx, std::move(psi), rng, record);
          } else {
            detail::run_diffusion_trajectory(ctx, std::move(psi), rng, record);
          }
          sums.add(record);
          jump_counts[static_cast<std::size_t>(i)] = record.jumps;
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, blocks);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  BlockSums total = std::move(block_sums.front());
  for (std::size_t blk = 1; blk < block_sums.size(); ++blk) total.add(block_sums[blk]);

  EnsembleResult result;
  result.n_trajectories = n;
  result.dt = ctx.step;
  result.jump_counts = config.unraveling == Unraveling::jumps ? std::move(jump_counts)
                                                              : std::vector<long long>{};
  result.channel_jumps = total.channel_jumps;
  auto& mean = result.mean;
  for (int s = 0; s < config.samples; ++s) {
    const auto k = static_cast<std::size_t>(s);
    mean.times.push_back(s == intervals ? config.t_final
                                        : static_cast<double>(s) * substeps * ctx.step);
    mean.n_target.push_back(total.n_target[k] / n);
    mean.n_aux.push_back(total.n_aux[k] / n);
    mean.a.push_back(total.a[k] / static_cast<double>(n));
    mean.b.push_back(total.b[k] / static_cast<double>(n));
    mean.trace.push_back(1.0);
    result.sem_n_target.push_back(standard_error(total.n_target[k], total.n_target_sq[k], n));
    result.sem_n_aux.push_back(standard_error(total.n_aux[k], total.n_aux_sq[k], n));
    result.sem_re_a.push_back(standard_error(total.a[k].real(), total.re_a_sq[k], n));
    result.sem_im_a.push_back(standard_error(total.a[k].imag(), total.im_a_sq[k], n));
  }
  return result;
}

}  // namespace freqconv
