#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseLU>

#include "freqconv/lindblad.hpp"

namespace freqconv {

const char* to_string(SteadyStateMethod method) {
  switch (method) {
    case SteadyStateMethod::direct_full: return "direct_full";
    case SteadyStateMethod::direct_sector: return "direct_sector";
    case SteadyStateMethod::long_time: return "long_time";
  }
  return "?";
}

namespace {

using ColOp = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

/// Every non-zero of `op` changes the total excitation number by `shift`.
bool shifts_excitations_by(const FockSpace& space, const SparseOp& op, int shift) {
  for (int i = 0; i < op.outerSize(); ++i) {
    for (SparseOp::InnerIterator it(op, i); it; ++it) {
      if (it.value() == 0.0) continue;
      if (space.excitations(static_cast<int>(it.row())) -
              space.excitations(static_cast<int>(it.col())) !=
          shift) {
        return false;
      }
    }
  }
  return true;
}

/// True when [H, N] = 0 and every jump changes N by a fixed amount, so the
/// block of ρ with equal excitation number on both sides is invariant.
bool conserves_excitations(const SystemModel& model, const Liouvillian& liouvillian) {
  const FockSpace& space = model.space();
  if (!shifts_excitations_by(space, liouvillian.effective_hamiltonian(0.0), 0)) return false;
  for (const auto& jump : liouvillian.jumps()) {
    bool fixed = false;
    for (int shift : {-1, 1}) fixed = fixed || shifts_excitations_by(space, jump, shift);
    if (!fixed) return false;
  }
  return true;
}

struct ElementIndex {
  std::vector<std::pair<int, int>> elements;  // (row, col) of ρ per unknown
  std::unordered_map<long long, int> lookup;
  int dim;

  long long key(int i, int j) const { return static_cast<long long>(i) * dim + j; }
  int find(int i, int j) const {
    auto it = lookup.find(key(i, j));
    return it == lookup.end() ? -1 : it->second;
  }
  void add(int i, int j) {
    lookup.emplace(key(i, j), static_cast<int>(elements.size()));
    elements.emplace_back(i, j);
  }
};

ElementIndex enumerate_elements(const FockSpace& space, bool sector_only,
                                long long max_unknowns) {
  ElementIndex index;
  index.dim = space.joint_dim();
  const int dim = index.dim;
  long long count = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (!sector_only || space.excitations(i) == space.excitations(j)) ++count;
    }
  }
  if (count > max_unknowns) return index;
  index.elements.reserve(static_cast<std::size_t>(count));
  index.lookup.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (!sector_only || space.excitations(i) == space.excitations(j)) index.add(i, j);
    }
  }
  return index;
}

/// Superoperator restricted to `index`, acting on unknowns ρ_ij.
ColOp assemble_superoperator(const Liouvillian& liouvillian, const ElementIndex& index) {
  const ColOp h = ColOp(liouvillian.effective_hamiltonian(0.0));
  std::vector<ColOp> jumps;
  for (const auto& j : liouvillian.jumps()) jumps.emplace_back(j);

  const int n = static_cast<int>(index.elements.size());
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 12);
  const Complex i_unit{0.0, 1.0};
  auto emit = [&](int row_i, int row_j, int col, Complex v) {
    const int row = index.find(row_i, row_j);
    if (row < 0) throw SteadyStateError("steady_state: restricted block is not invariant");
    triplets.emplace_back(row, col, v);
  };

  for (int u = 0; u < n; ++u) {
    const auto [i, j] = index.elements[static_cast<std::size_t>(u)];
    // -i H_eff ρ: (i', j) += -i H(i', i) ρ_ij
    for (ColOp::InnerIterator it(h, i); it; ++it) {
      emit(static_cast<int>(it.row()), j, u, -i_unit * it.value());
    }
    // +i ρ H_eff†: (i, j') += i ρ_ij conj(H(j', j))
    for (ColOp::InnerIterator it(h, j); it; ++it) {
      emit(i, static_cast<int>(it.row()), u, i_unit * std::conj(it.value()));
    }
    // L ρ L†: (i', j') += L(i', i) ρ_ij conj(L(j', j))
    for (const auto& jump : jumps) {
      for (ColOp::InnerIterator li(jump, i); li; ++li) {
        for (ColOp::InnerIterator lj(jump, j); lj; ++lj) {
          emit(static_cast<int>(li.row()), static_cast<int>(lj.row()), u,
               li.value() * std::conj(lj.value()));
        }
      }
    }
  }
  ColOp super(n, n);
  super.setFromTriplets(triplets.begin(), triplets.end());
  return super;
}

enum class DirectStatus { solved, singular, inaccurate };

DirectStatus solve_direct(const Liouvillian& liouvillian, const ElementIndex& index,
                          CMatrix& rho) {
  const int n = static_cast<int>(index.elements.size());
  const int dim = index.dim;
  ColOp super = assemble_superoperator(liouvillian, index);

  // Replace the equation for ρ_00 by the trace condition Σ ρ_ii = 1.
  const int pinned = index.find(0, 0);
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(super.nonZeros() + dim));
  for (int c = 0; c < super.outerSize(); ++c) {
    for (ColOp::InnerIterator it(super, c); it; ++it) {
      if (it.row() != pinned) triplets.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int d = 0; d < dim; ++d) triplets.emplace_back(pinned, index.find(d, d), 1.0);
  ColOp system(n, n);
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();

  Eigen::SparseLU<ColOp> lu;
  lu.analyzePattern(system);
  lu.factorize(system);
  if (lu.info() != Eigen::Success) return DirectStatus::singular;
  CVector rhs = CVector::Zero(n);
  rhs(pinned) = 1.0;
  CVector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) return DirectStatus::inaccurate;

  rho = CMatrix::Zero(dim, dim);
  for (int u = 0; u < n; ++u) {
    const auto [i, j] = index.elements[static_cast<std::size_t>(u)];
    rho(i, j) = x(u);
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Complex tr = rho.trace();
  if (!(std::abs(tr) > 0.0)) return DirectStatus::inaccurate;
  rho /= tr;
  return DirectStatus::solved;
}

double residual_of(const Liouvillian& liouvillian, const CMatrix& rho) {
  RhoMatrix r = rho;
  RhoMatrix out(r.rows(), r.cols());
  liouvillian.apply(0.0, r, out);
  return liouvillian.rate_bound() > 0.0 ? out.norm() / liouvillian.rate_bound() : out.norm();
}

CMatrix long_time(const SystemModel& model, const Liouvillian& liouvillian,
                  const SteadyStateOptions& options, double& residual) {
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& d : model.dissipators()) {
    if (d.rate > 0.0) slowest = std::min(slowest, d.rate);
  }
  const double t_max =
      options.fallback_max_time > 0.0 ? options.fallback_max_time : 200.0 / slowest;
  const double h = suggest_step(liouvillian);
  const long long check_every = 1000;

  const int dim = model.space().joint_dim();
  // Start from the uncoupled thermal product state.
  RhoMatrix rho = RhoMatrix::Zero(dim, dim);
  const Eigen::VectorXd pa = thermal_populations(model.space().dim_target(),
                                                 model.target_occupation());
  const Eigen::VectorXd pb = thermal_populations(model.space().dim_aux(),
                                                 model.aux_occupation());
  for (int na = 0; na < pa.size(); ++na) {
    for (int nb = 0; nb < pb.size(); ++nb) {
      const int k = model.space().index(na, nb);
      rho(k, k) = pa(na) * pb(nb);
    }
  }
  RhoMatrix k1(dim, dim), k2(k1), k3(k1), k4(k1), stage(k1);
  double t = 0.0;
  residual = std::numeric_limits<double>::infinity();
  for (long long step = 0; t < t_max; ++step) {
    liouvillian.apply(0.0, rho, k1);
    if (step % check_every == 0) {
      residual = k1.norm() / liouvillian.rate_bound();
      if (residual < options.fallback_tolerance) break;
    }
    stage.noalias() = rho + (0.5 * h) * k1;
    liouvillian.apply(0.0, stage, k2);
    stage.noalias() = rho + (0.5 * h) * k2;
    liouvillian.apply(0.0, stage, k3);
    stage.noalias() = rho + h * k3;
    liouvillian.apply(0.0, stage, k4);
    rho.noalias() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  CMatrix out = 0.5 * (CMatrix(rho) + CMatrix(rho.adjoint()));
  out /= out.trace();
  residual = residual_of(liouvillian, out);
  return out;
}

}  // namespace

double liouvillian_residual(const SystemModel& model, const DensityOperator& rho) {
  return residual_of(Liouvillian(model), rho.matrix());
}

SteadyState steady_state(const SystemModel& model, const SteadyStateOptions& options) {
  if (model.time_dependent()) {
    throw std::invalid_argument(
        "steady_state: model is time dependent; use propagate() and a late-time average");
  }
  const bool damped = std::any_of(model.dissipators().begin(), model.dissipators().end(),
                                  [](const Dissipator& d) { return d.rate > 0.0; });
  if (!damped) throw std::invalid_argument("steady_state: at least one damping rate must be > 0");

  const Liouvillian liouvillian(model);
  const bool sector = conserves_excitations(model, liouvillian);
  const ElementIndex index =
      enumerate_elements(model.space(), sector, options.max_direct_unknowns);
  const auto unknowns = static_cast<long long>(index.elements.size());

  if (unknowns > 0) {
    CMatrix rho;
    const DirectStatus status = solve_direct(liouvillian, index, rho);
    if (status == DirectStatus::singular) {
      throw SteadyStateError(
          "steady_state: Liouvillian with trace condition is singular; the stationary state "
          "is not unique (check that every mode is damped or coupled to a damped mode)");
    }
    if (status == DirectStatus::solved) {
      const double residual = residual_of(liouvillian, rho);
      if (residual < options.residual_tolerance) {
        return SteadyState{DensityOperator(std::move(rho)), residual,
                           sector ? SteadyStateMethod::direct_sector
                                  : SteadyStateMethod::direct_full,
                           unknowns};
      }
    }
  }

  double residual = 0.0;
  CMatrix rho = long_time(model, liouvillian, options, residual);
  if (!(residual < options.fallback_tolerance * 10.0)) {
    std::ostringstream msg;
    msg << "steady_state: no unique stationary state found (direct solve failed or was "
           "ill-conditioned; long-time residual "
        << residual << "); the Liouvillian may be degenerate";
    throw SteadyStateError(msg.str());
  }
  return SteadyState{DensityOperator(std::move(rho)), residual, SteadyStateMethod::long_time,
                     static_cast<long long>(model.space().joint_dim()) *
                         model.space().joint_dim()};
}

}  // namespace freqconv
