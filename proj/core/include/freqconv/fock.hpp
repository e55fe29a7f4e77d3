#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace freqconv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Which oscillator an operator acts on. `target` is the low-frequency
/// mechanical mode a, `aux` the superconducting mode b.
enum class Mode { target, aux };

const char* to_string(Mode mode);

/// Truncated two-mode Fock space.
///
/// Joint basis states are ordered row-major over occupations:
/// `index = n_a * dim_aux + n_b`, so a ⊗ I is `kron(a, I_aux)`.
class FockSpace {
 public:
  FockSpace(int dim_target, int dim_aux);

  int dim_target() const { return dim_target_; }
  int dim_aux() const { return dim_aux_; }
  int dim(Mode mode) const {
    return mode == Mode::target ? dim_target_ : dim_aux_;
  }
  int joint_dim() const { return dim_target_ * dim_aux_; }

  int index(int n_target, int n_aux) const {
    return n_target * dim_aux_ + n_aux;
  }
  /// Inverse of index(): (n_target, n_aux).
  std::pair<int, int> occupations(int index) const {
    return {index / dim_aux_, index % dim_aux_};
  }
  /// Total excitation number n_a + n_b of a joint basis state.
  int excitations(int index) const {
    return index / dim_aux_ + index % dim_aux_;
  }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int dim_target_;
  int dim_aux_;
};

/// An operator on the joint space, stored sparse.
class ModeOperator {
 public:
  ModeOperator(const FockSpace& space, SparseOp matrix, std::string label,
               bool hermitian = false);

  const FockSpace& space() const { return space_; }
  const SparseOp& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }
  bool hermitian() const { return hermitian_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  CMatrix dense() const { return CMatrix(matrix_); }
  ModeOperator adjoint() const;

  ModeOperator operator*(const ModeOperator& rhs) const;
  ModeOperator operator+(const ModeOperator& rhs) const;
  ModeOperator operator-(const ModeOperator& rhs) const;
  ModeOperator scaled(Complex factor, std::string label) const;

 private:
  FockSpace space_;
  SparseOp matrix_;
  std::string label_;
  bool hermitian_;
};

ModeOperator annihilation(const FockSpace& space, Mode mode);
ModeOperator creation(const FockSpace& space, Mode mode);
ModeOperator number(const FockSpace& space, Mode mode);
ModeOperator identity(const FockSpace& space);
ModeOperator zero_operator(const FockSpace& space, std::string label = "0");

/// Single-mode lowering operator of dimension `dim`, ⟨n-1|c|n⟩ = √n.
SparseOp lowering_matrix(int dim);

/// Pure state on the joint space. The norm is not forced to one; MCWF
/// segments carry unnormalized kets between jumps.
class JointState {
 public:
  JointState(const FockSpace& space, CVector amplitudes);

  static JointState fock(const FockSpace& space, int n_target, int n_aux);

  const FockSpace& space() const { return space_; }
  const CVector& amplitudes() const { return amplitudes_; }
  CVector& amplitudes() { return amplitudes_; }

  double norm_squared() const { return amplitudes_.squaredNorm(); }
  void normalize();

 private:
  FockSpace space_;
  CVector amplitudes_;
};

/// Density matrix. Construction checks shape, unit trace (1e-9) and
/// Hermiticity (1e-10 relative); positivity is checked by validate()
/// because it needs an eigendecomposition.
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix matrix);

  static DensityOperator from_pure(const JointState& psi);

  const CMatrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  Complex trace() const { return matrix_.trace(); }

  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
  /// Throws std::domain_error if any eigenvalue is below -tolerance.
  void validate(double tolerance = 1e-9) const;

 private:
  CMatrix matrix_;
};

/// Truncated Boltzmann state of one mode.
struct ThermalFactor {
  DensityOperator rho;        ///< dim × dim, diagonal
  Eigen::VectorXd populations;
  double nominal_occupation;  ///< requested n_occ
  double truncated_mean;      ///< Σ n p(n) after renormalization
  bool under_truncated;       ///< truncated mean off by more than 1%
  std::string warning;
};

ThermalFactor thermal_state(const FockSpace& space, Mode mode, double n_occ);

/// Populations p(n) ∝ (n/(1+n))^k over k < dim, renormalized.
Eigen::VectorXd thermal_populations(int dim, double n_occ);

/// ρ_target ⊗ ρ_aux in the joint ordering.
DensityOperator product_state(const FockSpace& space, const DensityOperator& target,
                              const DensityOperator& aux);

Complex expectation(const DensityOperator& rho, const ModeOperator& op);
Complex expectation(const JointState& psi, const ModeOperator& op);

/// Tr(ρ M) = Σ_ij M_ij ρ_ji for a sparse M, without forming ρM. Works for
/// either storage order of ρ.
template <typename Derived>
Complex trace_product(const Eigen::MatrixBase<Derived>& rho, const SparseOp& op) {
  if (rho.rows() != op.rows() || rho.cols() != op.cols()) {
    throw std::invalid_argument("expectation: dimension mismatch");
  }
  Complex sum = 0.0;
  for (int i = 0; i < op.outerSize(); ++i) {
    for (SparseOp::InnerIterator it(op, i); it; ++it) {
      sum += it.value() * rho(it.col(), it.row());
    }
  }
  return sum;
}

}  // namespace freqconv
