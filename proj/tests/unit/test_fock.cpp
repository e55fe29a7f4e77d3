#include <doctest.h>

#include <cmath>

#include "freqconv/fock.hpp"
#include "oracles.hpp"

using namespace freqconv;

TEST_SUITE("fock") {

TEST_CASE("lowering operator matrix elements") {
  const CMatrix c = CMatrix(lowering_matrix(3));
  CMatrix expected = CMatrix::Zero(3, 3);
  expected(0, 1) = 1.0;
  expected(1, 2) = std::sqrt(2.0);
  CHECK((c - expected).norm() == 0.0);

  const FockSpace single(3, 2);
  const ModeOperator a = annihilation(single, Mode::target);
  CHECK(a.dense()(single.index(0, 0), single.index(1, 0)) == Complex(1.0));
  CHECK(a.dense()(single.index(1, 1), single.index(2, 1)) == Complex(std::sqrt(2.0)));
}

TEST_CASE("basis ordering is row-major over (n_a, n_b)") {
  const FockSpace space(4, 3);
  CHECK(space.joint_dim() == 12);
  CHECK(space.index(2, 1) == 7);
  CHECK(space.occupations(7) == std::pair{2, 1});
  CHECK(space.excitations(7) == 3);
  const ModeOperator nb = number(space, Mode::aux);
  CHECK(nb.dense()(space.index(2, 1), space.index(2, 1)) == Complex(1.0));
}

TEST_CASE("canonical commutator holds below the top level") {
  const FockSpace space(5, 4);
  for (Mode mode : {Mode::target, Mode::aux}) {
    const ModeOperator c = annihilation(space, mode);
    const CMatrix comm = (c * c.adjoint() - c.adjoint() * c).dense();
    for (int i = 0; i < space.joint_dim(); ++i) {
      const auto [na, nb] = space.occupations(i);
      const int n = mode == Mode::target ? na : nb;
      const double diag = n + 1 < space.dim(mode) ? 1.0 : -(space.dim(mode) - 1.0);
      CHECK(std::abs(comm(i, i) - diag) < 1e-14);
    }
    CHECK((comm - CMatrix(comm.diagonal().asDiagonal())).norm() == 0.0);
  }
}

TEST_CASE("operators on different modes commute exactly") {
  const FockSpace space(4, 5);
  const ModeOperator a = annihilation(space, Mode::target);
  const ModeOperator b = annihilation(space, Mode::aux);
  CHECK((a * b - b * a).dense().norm() == 0.0);
  CHECK((a * b.adjoint() - b.adjoint() * a).dense().norm() == 0.0);
}

TEST_CASE("number operator spectrum on the joint space") {
  const FockSpace space(4, 3);
  const CMatrix n = number(space, Mode::target).dense();
  CHECK((n - CMatrix(n.diagonal().asDiagonal())).norm() == 0.0);
  std::vector<int> multiplicity(4, 0);
  for (int i = 0; i < space.joint_dim(); ++i) {
    const double v = n(i, i).real();
    REQUIRE(v == std::round(v));
    ++multiplicity[static_cast<int>(v)];
  }
  for (int m : multiplicity) CHECK(m == 3);
  CHECK(number(space, Mode::target).hermitian());
}

TEST_CASE("thermal state") {
  const FockSpace space(32, 2);
  SUBCASE("zero occupation is the vacuum") {
    const ThermalFactor t = thermal_state(space, Mode::target, 0.0);
    CHECK(t.rho.matrix()(0, 0) == Complex(1.0));
    CHECK(t.rho.matrix().norm() == doctest::Approx(1.0));
    CHECK(t.truncated_mean == 0.0);
  }
  SUBCASE("n = 3.68 at dim 32") {
    const ThermalFactor t = thermal_state(space, Mode::target, 3.68);
    CHECK(t.truncated_mean == doctest::Approx(oracle::truncated_thermal_mean(3.68, 32)).epsilon(1e-12));
    CHECK(std::abs(t.truncated_mean - 3.68) < 0.01 * 3.68);
    CHECK_FALSE(t.under_truncated);
    CHECK(t.warning.empty());
    const CMatrix& rho = t.rho.matrix();
    CHECK((rho - CMatrix(rho.diagonal().asDiagonal())).norm() == 0.0);
  }
  SUBCASE("n = 20 at dim 32 is under-truncated") {
    const ThermalFactor t = thermal_state(space, Mode::target, 20.0);
    CHECK(t.under_truncated);
    CHECK_FALSE(t.warning.empty());
    CHECK(t.truncated_mean < 0.8 * 20.0);
    CHECK(t.truncated_mean == doctest::Approx(oracle::truncated_thermal_mean(20.0, 32)).epsilon(1e-12));
  }
  CHECK_THROWS(thermal_state(space, Mode::target, -1.0));
}

TEST_CASE("expectation values") {
  const FockSpace space(8, 3);
  const ModeOperator n = number(space, Mode::target);
  CHECK(expectation(DensityOperator::from_pure(JointState::fock(space, 0, 0)), n) == Complex(0.0));
  CHECK(expectation(DensityOperator::from_pure(JointState::fock(space, 5, 2)), n) == Complex(5.0));
  CHECK(expectation(JointState::fock(space, 5, 2), number(space, Mode::aux)) == Complex(2.0));

  const FockSpace big(32, 2);
  const ThermalFactor ta = thermal_state(big, Mode::target, 3.68);
  const ThermalFactor tb = thermal_state(big, Mode::aux, 0.0);
  const DensityOperator rho = product_state(big, ta.rho, tb.rho);
  const Complex v = expectation(rho, number(big, Mode::target));
  CHECK(v.real() == doctest::Approx(oracle::truncated_thermal_mean(3.68, 32)).epsilon(1e-12));
  CHECK(std::abs(v.imag()) < 1e-9);

  CHECK_THROWS_AS(expectation(rho, n), std::invalid_argument);
}

TEST_CASE("density operator invariants are enforced") {
  CMatrix m = CMatrix::Identity(4, 4) * 0.3;
  CHECK_THROWS_AS(DensityOperator{m}, std::invalid_argument);
  m = CMatrix::Identity(4, 4) * 0.25;
  m(0, 1) = Complex(0.0, 0.1);
  CHECK_THROWS_AS(DensityOperator{m}, std::invalid_argument);
  m(1, 0) = std::conj(m(0, 1));
  CHECK_NOTHROW(DensityOperator{m});

  CMatrix negative = CMatrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  const DensityOperator bad(negative);
  CHECK(bad.min_eigenvalue() == doctest::Approx(-0.5));
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("operator construction is reproducible") {
  const FockSpace space(6, 5);
  const CMatrix first = (annihilation(space, Mode::target) * creation(space, Mode::aux)).dense();
  const CMatrix second = (annihilation(space, Mode::target) * creation(space, Mode::aux)).dense();
  CHECK(first == second);
  CHECK_THROWS(FockSpace(1, 4));
  CHECK_THROWS_AS(JointState::fock(space, 6, 0), std::out_of_range);
}

}
