#include "freqconv/langevin.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace freqconv {

namespace {
constexpr Complex kI{0.0, 1.0};
}

Eigen::Matrix2cd LinearModel::drift() const {
  Eigen::Matrix2cd m;
  m << -0.5 * gamma, -kI * g,
       -kI * g, -0.5 * kappa;
  return m;
}

Eigen::Vector2cd LinearModel::forcing() const {
  return Eigen::Vector2cd(0.0, std::sqrt(kappa) * beta);
}

Eigen::Matrix2d LinearModel::diffusion() const {
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  d(0, 0) = gamma * n_thermal;
  d(1, 1) = kappa * n_aux;
  return d;
}

DecayConstants decay_constants(double gamma, double kappa, double g) {
  if (gamma < 0.0 || kappa < 0.0 || g < 0.0) {
    throw std::invalid_argument("decay_constants: rates must be >= 0");
  }
  DecayConstants out{};
  const Complex disc = std::sqrt(Complex(0.25 * kappa * kappa - 4.0 * g * g, 0.0));
  out.lambda_plus = 0.5 * kappa + disc;
  out.lambda_minus = 0.5 * kappa - disc;
  out.n_plus = std::sqrt(out.lambda_plus * out.lambda_plus + g * g);
  out.n_minus = std::sqrt(out.lambda_minus * out.lambda_minus + g * g);
  out.complex_regime = g > 0.25 * kappa;

  const LinearModel linear{gamma, kappa, g, 0.0, 0.0, {}};
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> solver(linear.drift(), false);
  Eigen::Vector2cd ev = solver.eigenvalues();
  if (ev(1).real() < ev(0).real()) std::swap(ev(0), ev(1));
  out.drift_eigenvalues = ev;
  out.energy_rates = -2.0 * ev;
  out.gamma_not_small = kappa <= 0.0 || gamma > 0.1 * kappa;
  return out;
}

Eigen::Vector2cd steady_mean(const LinearModel& model) {
  const Eigen::Matrix2cd a = model.drift();
  const Eigen::Vector2cd f = model.forcing();
  if (f.isZero(0.0)) return Eigen::Vector2cd::Zero();
  return a.fullPivLu().solve(-f);
}

Eigen::Vector2cd mean_at(const LinearModel& model, const Eigen::Vector2cd& x0, double t) {
  // exp of [[A, f], [0, 0]] t carries the constant forcing.
  Eigen::Matrix3cd augmented = Eigen::Matrix3cd::Zero();
  augmented.topLeftCorner<2, 2>() = model.drift();
  augmented.topRightCorner<2, 1>() = model.forcing();
  const Eigen::Matrix3cd propagator = (augmented * t).exp();
  return propagator.topLeftCorner<2, 2>() * x0 + propagator.topRightCorner<2, 1>();
}

CoherentAmplitude coherent_amplitude(Complex beta, double gamma, double kappa, double g) {
  CoherentAmplitude out{};
  const double k2 = kappa * kappa;
  const double denom = k2 - 9.0 * g * g;
  out.closed_form_singular = g == 0.0 || std::abs(denom) <= 1e-12 * k2;
  if (beta == Complex{}) {
    out.closed_form = 0.0;
  } else if (out.closed_form_singular) {
    out.closed_form = Complex(std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN());
  } else {
    out.closed_form = -kI * beta * (std::sqrt(kappa) / g) * ((k2 - 6.0 * g * g) / denom);
  }
  const Eigen::Vector2cd x = steady_mean(LinearModel{gamma, kappa, g, 0.0, 0.0, beta});
  out.exact = x(0);
  out.exact_aux = x(1);
  return out;
}

Eigen::MatrixXcd solve_lyapunov(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("solve_lyapunov: A and Q must be square and of equal size");
  }
  // vec(A X + X Aᴴ) = (I ⊗ A + conj(A) ⊗ I) vec(X), column-major vec.
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += id(i, j) * a + std::conj(a(i, j)) * id;
    }
  }
  const Eigen::VectorXcd rhs = -Eigen::Map<const Eigen::VectorXcd>(q.eval().data(), n * n);
  const Eigen::VectorXcd x = k.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, n);
}

SecondMoments steady_covariance(const LinearModel& model) {
  const Eigen::Matrix2cd drift = model.drift();
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> solver(drift, false);
  for (Eigen::Index i = 0; i < 2; ++i) {
    if (!(solver.eigenvalues()(i).real() < 0.0)) {
      throw UnstableDriftError("steady_covariance: drift matrix is not strictly stable");
    }
  }
  // d/dt N = conj(A) N + N Aᵀ + D, i.e. a Lyapunov equation in conj(A).
  const Eigen::MatrixXcd n =
      solve_lyapunov(drift.conjugate(), model.diffusion().cast<Complex>());
  SecondMoments out{};
  out.fluctuations = 0.5 * (n + n.adjoint());
  out.mean = steady_mean(model);
  out.n_target = std::norm(out.mean(0)) + out.fluctuations(0, 0).real();
  out.n_aux = std::norm(out.mean(1)) + out.fluctuations(1, 1).real();
  out.target_aux = std::conj(out.mean(0)) * out.mean(1) + out.fluctuations(0, 1);
  return out;
}

SecondMoments moments_at(const LinearModel& model, const Eigen::Matrix2cd& n0,
                         const Eigen::Vector2cd& x0, double t) {
  // Column-major vec: vec(conj(A) N + N Aᵀ) = (I ⊗ conj(A) + A ⊗ I) vec(N).
  const Eigen::Matrix2cd a = model.drift();
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix<Complex, 5, 5> augmented = Eigen::Matrix<Complex, 5, 5>::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      augmented.block<2, 2>(2 * i, 2 * j) = id(i, j) * a.conjugate() + a(i, j) * id;
    }
  }
  const Eigen::Matrix2cd d = model.diffusion().cast<Complex>();
  augmented.block<4, 1>(0, 4) = Eigen::Map<const Eigen::Vector4cd>(d.data());
  const Eigen::Matrix<Complex, 5, 5> propagator = (augmented * t).exp();
  const Eigen::Vector4cd v = propagator.topLeftCorner<4, 4>() *
                                 Eigen::Map<const Eigen::Vector4cd>(n0.data()) +
                             propagator.block<4, 1>(0, 4);
  const Eigen::Matrix2cd n = Eigen::Map<const Eigen::Matrix2cd>(v.data());

  SecondMoments out{};
  out.fluctuations = 0.5 * (n + n.adjoint());
  out.mean = mean_at(model, x0, t);
  out.n_target = std::norm(out.mean(0)) + out.fluctuations(0, 0).real();
  out.n_aux = std::norm(out.mean(1)) + out.fluctuations(1, 1).real();
  out.target_aux = std::conj(out.mean(0)) * out.mean(1) + out.fluctuations(0, 1);
  return out;
}

OccupationFormula occupation_formula(double gamma, double kappa, double g, double n_thermal) {
  const DecayConstants dc = decay_constants(gamma, kappa, g);
  OccupationFormula out{};
  out.complex_regime = dc.complex_regime;
  if (n_thermal == 0.0 || gamma == 0.0) return out;

  const Complex lm = dc.lambda_minus;
  const Complex lp = dc.lambda_plus;
  const Complex nm2 = dc.n_minus * dc.n_minus;
  const Complex np2 = dc.n_plus * dc.n_plus;
  const Complex sum = lm * lm * lm / (nm2 * nm2) +
                      4.0 * lm * lm * lp * lp / (kappa * nm2 * np2) +
                      lp * lp * lp / (np2 * np2);
  const Complex value = 0.5 * gamma * n_thermal * sum;
  out.value = value.real();
  out.imaginary_part = value.imag();
  return out;
}

}  // namespace freqconv
