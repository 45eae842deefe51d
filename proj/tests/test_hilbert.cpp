#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "ecsense/hilbert.hpp"
#include "ecsense/rng.hpp"

using namespace ecsense;

namespace {

Matrix random_matrix(Stream& s, int d, double scale) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * Complex(s.uniform() - 0.5, s.uniform() - 0.5);
  return m;
}

// Reference exponential from Eigen's own implementation, on a heap-sized type.
Matrix reference_expm(const Matrix& a) {
  const Eigen::MatrixXcd dyn = a;
  const Eigen::MatrixXcd e = dyn.exp();
  return e;
}

}  // namespace

TEST_CASE("total_dimension rejects bad subsystem lists") {
  const std::vector<int> ok{2, 2, 2};
  CHECK(total_dimension(ok) == 8);
  CHECK_THROWS_AS(total_dimension(std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(total_dimension(std::vector<int>{2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(total_dimension(std::vector<int>{4, 8}), std::invalid_argument);
}

TEST_CASE("Pauli algebra") {
  const Matrix x = sigma_x().matrix(), y = sigma_y().matrix(), z = sigma_z().matrix();
  CHECK(max_abs(x * y - kI * z) < 1e-15);
  CHECK(max_abs(y * z - kI * x) < 1e-15);
  CHECK(max_abs(x * x - Matrix::Identity(2, 2)) < 1e-15);
  CHECK(sigma_minus()(0, 1) == Complex(1.0));
  CHECK(sigma_plus()(1, 0) == Complex(1.0));
  CHECK(max_abs(qubit_projector(1).matrix() - sigma_plus().matrix() * sigma_minus().matrix()) ==
        0.0);
}

TEST_CASE("tensor ordering puts the first factor most significant") {
  const std::vector<int> dims{2, 2};
  const auto flipped = apply(tensor_product(sigma_x(), Operator::identity(2)),
                             StateVector::basis(dims, 0));
  CHECK(std::abs(flipped[2] - 1.0) < 1e-15);
  CHECK(max_abs(embed(sigma_x(), 0, dims).matrix() -
                tensor_product(sigma_x(), Operator::identity(2)).matrix()) == 0.0);
  CHECK(max_abs(embed(sigma_z(), 1, dims).matrix() -
                tensor_product(Operator::identity(2), sigma_z()).matrix()) == 0.0);
}

TEST_CASE("tagged constructors validate their claim") {
  CHECK_NOTHROW(Operator::hermitian(sigma_y().matrix()));
  CHECK_THROWS_AS(Operator::hermitian(sigma_minus().matrix()), std::invalid_argument);
  CHECK_THROWS_AS(Operator::unitary(2.0 * sigma_x().matrix()), std::invalid_argument);
  CHECK_THROWS_AS(Operator(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("state helpers") {
  const StateVector zero({2}, Vector::Zero(2));
  CHECK_THROWS_AS(zero.normalized(), std::logic_error);
  CHECK_THROWS_AS(apply(Operator::identity(4), StateVector::qubit(1.0, 0.0)),
                  std::invalid_argument);
  const StateVector a = StateVector::qubit(0.6, Complex(0.0, 0.8));
  const StateVector b({2}, a.amps() * std::polar(3.0, 1.234));
  CHECK(fidelity(a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(inner(StateVector::qubit(0.0, 1.0), a) - Complex(0.0, 0.8)) < 1e-15);
}

TEST_CASE("expm agrees with an independent implementation across norms") {
  Stream s(2024, 0);
  // Spans every Pade degree and several squaring counts.
  for (double scale : {1e-4, 0.05, 0.4, 1.5, 3.0, 12.0, 80.0}) {
    for (int d : {1, 2, 4, 8, 16}) {
      const Matrix a = random_matrix(s, d, scale);
      const Matrix ref = reference_expm(a);
      const double rel = max_abs(expm(a) - ref) / std::max(1.0, max_abs(ref));
      CHECK_MESSAGE(rel < 1e-11, "scale " << scale << " dim " << d);
    }
  }
}

TEST_CASE("propagator of a Hermitian generator is unitary") {
  Stream s(5, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix(s, 4, 3.0);
    const Operator u = propagator(Operator::hermitian(a + a.adjoint()), 0.7);
    CHECK(u.tag() == Operator::Tag::kUnitary);
    CHECK(u.is_unitary(1e-12));
  }
}

TEST_CASE("a quarter-period sigma_x generator is a pi-pulse") {
  const double dt = 0.37;
  const Operator h = (std::numbers::pi / (2.0 * dt)) * sigma_x();
  CHECK(max_abs(propagator(h, dt).matrix() - (-kI) * sigma_x().matrix()) < 1e-14);
}

TEST_CASE("non-Hermitian generator decays the excited amplitude") {
  const double gamma = 0.8, t = 1.3;
  const Operator h_eff(Complex(0.0, -gamma) * qubit_projector(1).matrix());
  const Matrix u = propagator(h_eff, t).matrix();
  CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(u(1, 1) - std::exp(-gamma * t)) < 1e-15);
}
