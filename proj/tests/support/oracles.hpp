#pragma once

// Reference solutions used only by the tests. Each is computed by a route
// independent of the library code it checks.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "freqconv/model.hpp"

namespace oracle {

using Complex = std::complex<double>;

/// Σ n x^n / Σ x^n over n < dim with x = n/(1+n), summed term by term.
inline double truncated_thermal_mean(double n_occ, int dim) {
  if (n_occ == 0.0) return 0.0;
  const double x = n_occ / (1.0 + n_occ);
  double weight = 1.0, z = 0.0, m = 0.0;
  for (int k = 0; k < dim; ++k) {
    z += weight;
    m += k * weight;
    weight *= x;
  }
  return m / z;
}

/// Damped single mode: ⟨n(t)⟩ = n_T + (n0 - n_T) e^{-γt}.
inline double decay_law(double n0, double n_thermal, double gamma, double t) {
  return n_thermal + (n0 - n_thermal) * std::exp(-gamma * t);
}

/// Resonant beam splitter from |1,0⟩: ⟨n_a(t)⟩ = cos²(gt).
inline double swap_population(double g, double t) {
  const double c = std::cos(g * t);
  return c * c;
}

/// Dense superoperator of a model at time t, column-stacking convention
/// vec(AXB) = (Bᵀ ⊗ A) vec(X).
inline Eigen::MatrixXcd dense_liouvillian(const freqconv::SystemModel& model, double t) {
  const int d = model.space().joint_dim();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd h = model.propagation_hamiltonian().at(t).dense();
  auto kron = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < a.cols(); ++j) {
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
      }
    }
    return out;
  };
  const Complex i{0.0, 1.0};
  Eigen::MatrixXcd l = -i * kron(id, h) + i * kron(h.transpose(), id);
  for (const auto& dis : model.dissipators()) {
    if (dis.rate == 0.0) continue;
    const Eigen::MatrixXcd c = dis.jump.dense();
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    l += dis.rate * (kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id));
  }
  return l;
}

/// First and normally ordered second moments of the RWA Langevin model,
/// integrated with classical RK4 on
///   dx/dt = A x + f,   dN/dt = conj(A) N + N Aᵀ + D.
struct Moments {
  Eigen::Vector2cd mean;
  Eigen::Matrix2cd fluctuations;
};

inline Moments integrate_moments(double gamma, double kappa, double g, double n_thermal,
                                 double n_aux, Complex beta, Moments start, double t,
                                 int steps) {
  const Complex i{0.0, 1.0};
  Eigen::Matrix2cd a;
  a << -gamma / 2.0, -i * g, -i * g, -kappa / 2.0;
  const Eigen::Vector2cd f(0.0, std::sqrt(kappa) * beta);
  Eigen::Matrix2cd diff = Eigen::Matrix2cd::Zero();
  diff(0, 0) = gamma * n_thermal;
  diff(1, 1) = kappa * n_aux;
  auto rhs = [&](const Moments& m) {
    return Moments{a * m.mean + f,
                   a.conjugate() * m.fluctuations + m.fluctuations * a.transpose() + diff};
  };
  auto axpy = [](const Moments& x, double h, const Moments& k) {
    return Moments{x.mean + h * k.mean, x.fluctuations + h * k.fluctuations};
  };
  const double h = t / steps;
  Moments m = start;
  for (int s = 0; s < steps; ++s) {
    const Moments k1 = rhs(m);
    const Moments k2 = rhs(axpy(m, h / 2, k1));
    const Moments k3 = rhs(axpy(m, h / 2, k2));
    const Moments k4 = rhs(axpy(m, h, k3));
    m.mean += h / 6 * (k1.mean + 2.0 * k2.mean + 2.0 * k3.mean + k4.mean);
    m.fluctuations +=
        h / 6 * (k1.fluctuations + 2.0 * k2.fluctuations + 2.0 * k3.fluctuations + k4.fluctuations);
  }
  return m;
}

/// ⟨a⟩ of the RWA steady state by Cramer's rule on the 2×2 drift system.
inline Complex steady_amplitude(Complex beta, double gamma, double kappa, double g) {
  const Complex i{0.0, 1.0};
  // (γ/2) a + i g b = 0,  i g a + (κ/2) b = √κ β
  const Complex det = gamma * kappa / 4.0 + g * g;
  return -i * g * std::sqrt(kappa) * beta / det;
}

}  // namespace oracle
