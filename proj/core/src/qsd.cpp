#include <cmath>
#include <sstream>

#include "trajectory.hpp"

namespace freqconv::detail {

/// Normalized quantum state diffusion,
///
///   dψ = [-i H_eff + Σ_k (ℓ_k* L_k - ½|ℓ_k|²)] ψ dt + Σ_k (L_k - ℓ_k) ψ dξ_k,
///
/// with ℓ_k = ⟨L_k⟩ and complex Wiener increments E|dξ|² = dt, E dξ² = 0.
/// The Milstein correction keeps the diagonal term ½ (L_k - ℓ_k)² ψ dξ_k²
/// with ℓ_k frozen over the step; ψ is renormalized after every step.
void run_diffusion_trajectory(const TrajectoryContext& ctx, CVector psi, TrajectoryRng& rng,
                              TrajectoryRecord& record) {
  const Liouvillian& liouvillian = ctx.liouvillian;
  const auto& jumps = liouvillian.jumps();
  const double h = ctx.step;
  const double noise_scale = std::sqrt(0.5 * h);

  psi /= psi.norm();
  CVector drift(psi.size()), next(psi.size()), lpsi(psi.size()), centred(psi.size());
  record_ket(ctx, psi, 0.0, 0, record);

  long long step = 0;
  for (int s = 0; s < ctx.intervals; ++s) {
    for (long long sub = 0; sub < ctx.substeps; ++sub, ++step) {
      const double t = static_cast<double>(step) * h;
      liouvillian.apply_effective(t, psi, drift);
      next = psi;
      for (const auto& jump : jumps) {
        lpsi.noalias() = jump * psi;
        const Complex ell = psi.dot(lpsi);
        const Complex dxi = noise_scale * Complex(rng.normal(), rng.normal());
        drift.noalias() += std::conj(ell) * lpsi - (0.5 * std::norm(ell)) * psi;
        centred.noalias() = lpsi - ell * psi;
        next.noalias() += dxi * centred;
        lpsi.noalias() = jump * centred;
        next.noalias() += (0.5 * dxi * dxi) * (lpsi - ell * centred);
      }
      next.noalias() += h * drift;
      const double norm = next.norm();
      if (!std::isfinite(norm) || norm < 1e-6) {
        std::ostringstream msg;
        msg << "run_ensemble: diffusion step failed at t = " << t << " s (norm " << norm
            << "); step " << h << " s is too large";
        throw TrajectoryError(msg.str());
      }
      psi = next / norm;
    }
    const double t = s + 1 == ctx.intervals ? ctx.t_final : static_cast<double>(step) * h;
    record_ket(ctx, psi, t, s + 1, record);
  }
}

}  // namespace freqconv::detail
