#include "freqconv/fock.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

namespace freqconv {

const char* to_string(Mode mode) {
  return mode == Mode::target ? "target" : "aux";
}

FockSpace::FockSpace(int dim_target, int dim_aux)
    : dim_target_(dim_target), dim_aux_(dim_aux) {
  if (dim_target < 2 || dim_aux < 2) {
    throw std::invalid_argument("FockSpace: each truncation must be at least 2");
  }
}

namespace {

double relative_antihermitian_norm(const SparseOp& m) {
  const double scale = m.norm();
  if (scale == 0.0) return 0.0;
  const SparseOp diff = m - SparseOp(m.adjoint());
  return diff.norm() / scale;
}

SparseOp identity_matrix(int dim) {
  SparseOp id(dim, dim);
  id.setIdentity();
  return id;
}

SparseOp kron(const SparseOp& lhs, const SparseOp& rhs) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(lhs.nonZeros() * rhs.nonZeros()));
  for (int i = 0; i < lhs.outerSize(); ++i) {
    for (SparseOp::InnerIterator l(lhs, i); l; ++l) {
      for (int k = 0; k < rhs.outerSize(); ++k) {
        for (SparseOp::InnerIterator r(rhs, k); r; ++r) {
          triplets.emplace_back(l.row() * rhs.rows() + r.row(),
                                l.col() * rhs.cols() + r.col(),
                                l.value() * r.value());
        }
      }
    }
  }
  SparseOp out(lhs.rows() * rhs.rows(), lhs.cols() * rhs.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SparseOp embed(const FockSpace& space, Mode mode, const SparseOp& single) {
  return mode == Mode::target ? kron(single, identity_matrix(space.dim_aux()))
                              : kron(identity_matrix(space.dim_target()), single);
}

const char* mode_symbol(Mode mode) { return mode == Mode::target ? "a" : "b"; }

}  // namespace

ModeOperator::ModeOperator(const FockSpace& space, SparseOp matrix, std::string label,
                           bool hermitian)
    : space_(space), matrix_(std::move(matrix)), label_(std::move(label)),
      hermitian_(hermitian) {
  if (matrix_.rows() != space_.joint_dim() || matrix_.cols() != space_.joint_dim()) {
    throw std::invalid_argument("ModeOperator '" + label_ +
                                "': matrix does not match the joint dimension");
  }
  matrix_.makeCompressed();
  if (hermitian_ && relative_antihermitian_norm(matrix_) > 1e-12) {
    throw std::invalid_argument("ModeOperator '" + label_ +
                                "' flagged Hermitian but M != M^dagger");
  }
}

ModeOperator ModeOperator::adjoint() const {
  return ModeOperator(space_, SparseOp(matrix_.adjoint()),
                      hermitian_ ? label_ : "(" + label_ + ")^dag", hermitian_);
}

ModeOperator ModeOperator::operator*(const ModeOperator& rhs) const {
  if (!(space_ == rhs.space_)) throw std::invalid_argument("ModeOperator *: space mismatch");
  SparseOp product = (matrix_ * rhs.matrix_).pruned();
  return ModeOperator(space_, std::move(product), label_ + " " + rhs.label_);
}

ModeOperator ModeOperator::operator+(const ModeOperator& rhs) const {
  if (!(space_ == rhs.space_)) throw std::invalid_argument("ModeOperator +: space mismatch");
  return ModeOperator(space_, SparseOp(matrix_ + rhs.matrix_),
                      label_ + " + " + rhs.label_, hermitian_ && rhs.hermitian_);
}

ModeOperator ModeOperator::operator-(const ModeOperator& rhs) const {
  if (!(space_ == rhs.space_)) throw std::invalid_argument("ModeOperator -: space mismatch");
  return ModeOperator(space_, SparseOp(matrix_ - rhs.matrix_),
                      label_ + " - " + rhs.label_, hermitian_ && rhs.hermitian_);
}

ModeOperator ModeOperator::scaled(Complex factor, std::string label) const {
  const bool keeps_hermitian = hermitian_ && factor.imag() == 0.0;
  return ModeOperator(space_, SparseOp(factor * matrix_), std::move(label), keeps_hermitian);
}

SparseOp lowering_matrix(int dim) {
  SparseOp c(dim, dim);
  c.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (int n = 1; n < dim; ++n) c.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  c.makeCompressed();
  return c;
}

ModeOperator annihilation(const FockSpace& space, Mode mode) {
  return ModeOperator(space, embed(space, mode, lowering_matrix(space.dim(mode))),
                      mode_symbol(mode));
}

ModeOperator creation(const FockSpace& space, Mode mode) {
  return ModeOperator(space,
                      embed(space, mode, SparseOp(lowering_matrix(space.dim(mode)).adjoint())),
                      std::string(mode_symbol(mode)) + "^dag");
}

ModeOperator number(const FockSpace& space, Mode mode) {
  const int dim = space.dim(mode);
  SparseOp n(dim, dim);
  for (int k = 1; k < dim; ++k) n.insert(k, k) = static_cast<double>(k);
  const std::string sym = mode_symbol(mode);
  return ModeOperator(space, embed(space, mode, n), sym + "^dag " + sym, true);
}

ModeOperator identity(const FockSpace& space) {
  return ModeOperator(space, identity_matrix(space.joint_dim()), "I", true);
}

ModeOperator zero_operator(const FockSpace& space, std::string label) {
  return ModeOperator(space, SparseOp(space.joint_dim(), space.joint_dim()), std::move(label),
                      true);
}

JointState::JointState(const FockSpace& space, CVector amplitudes)
    : space_(space), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.joint_dim()) {
    throw std::invalid_argument("JointState: amplitude vector does not match joint dimension");
  }
}

JointState JointState::fock(const FockSpace& space, int n_target, int n_aux) {
  if (n_target < 0 || n_target >= space.dim_target() || n_aux < 0 ||
      n_aux >= space.dim_aux()) {
    throw std::out_of_range("JointState::fock: occupation outside truncation");
  }
  CVector amps = CVector::Zero(space.joint_dim());
  amps(space.index(n_target, n_aux)) = 1.0;
  return JointState(space, std::move(amps));
}

void JointState::normalize() {
  const double n = amplitudes_.norm();
  if (!(n > 0.0)) throw std::domain_error("JointState::normalize: zero state");
  amplitudes_ /= n;
}

DensityOperator::DensityOperator(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw std::invalid_argument("DensityOperator: matrix must be square and non-empty");
  }
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > 1e-9) {
    throw std::invalid_argument("DensityOperator: trace differs from 1 by more than 1e-9");
  }
  const double scale = matrix_.norm();
  if ((matrix_ - matrix_.adjoint()).norm() > 1e-10 * scale) {
    throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
  }
}

DensityOperator DensityOperator::from_pure(const JointState& psi) {
  CVector v = psi.amplitudes();
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0)) throw std::domain_error("DensityOperator::from_pure: zero state");
  return DensityOperator(v * v.adjoint() / n2);
}

double DensityOperator::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityOperator::validate(double tolerance) const {
  const double lowest = min_eigenvalue();
  if (lowest < -tolerance) {
    throw std::domain_error("DensityOperator: negative eigenvalue " + std::to_string(lowest));
  }
}

Eigen::VectorXd thermal_populations(int dim, double n_occ) {
  if (!(n_occ >= 0.0)) throw std::invalid_argument("thermal_populations: n_occ must be >= 0");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
  if (n_occ == 0.0) {
    p(0) = 1.0;
    return p;
  }
  const double ratio = n_occ / (1.0 + n_occ);
  double weight = 1.0;
  for (int n = 0; n < dim; ++n) {
    p(n) = weight;
    weight *= ratio;
  }
  return p / p.sum();
}

ThermalFactor thermal_state(const FockSpace& space, Mode mode, double n_occ) {
  const int dim = space.dim(mode);
  Eigen::VectorXd p = thermal_populations(dim, n_occ);
  double mean = 0.0;
  for (int n = 0; n < dim; ++n) mean += n * p(n);

  const bool under = n_occ > 0.0 && std::abs(mean - n_occ) > 0.01 * n_occ;
  std::string warning;
  if (under) {
    warning = std::string("thermal state of ") + to_string(mode) + " mode: truncated mean " +
              std::to_string(mean) + " deviates from nominal " + std::to_string(n_occ) +
              " by more than 1% at truncation " + std::to_string(dim);
  }
  CMatrix rho = CMatrix::Zero(dim, dim);
  rho.diagonal() = p.cast<Complex>();
  return ThermalFactor{DensityOperator(std::move(rho)), std::move(p), n_occ, mean, under,
                       std::move(warning)};
}

DensityOperator product_state(const FockSpace& space, const DensityOperator& target,
                              const DensityOperator& aux) {
  if (target.dim() != space.dim_target() || aux.dim() != space.dim_aux()) {
    throw std::invalid_argument("product_state: factor dimensions do not match the space");
  }
  const int da = space.dim_target();
  const int db = space.dim_aux();
  CMatrix joint(space.joint_dim(), space.joint_dim());
  for (int i = 0; i < da; ++i) {
    for (int j = 0; j < da; ++j) {
      joint.block(i * db, j * db, db, db) = target.matrix()(i, j) * aux.matrix();
    }
  }
  return DensityOperator(std::move(joint));
}

Complex expectation(const DensityOperator& rho, const ModeOperator& op) {
  return trace_product(rho.matrix(), op.matrix());
}

Complex expectation(const JointState& psi, const ModeOperator& op) {
  if (psi.amplitudes().size() != op.dim()) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  const CVector& v = psi.amplitudes();
  return v.dot(op.matrix() * v) / v.squaredNorm();
}

}  // namespace freqconv
