#include "ecsense/hilbert.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ecsense {

int total_dimension(std::span<const int> dims) {
  if (dims.empty()) throw std::invalid_argument("empty subsystem list");
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw std::invalid_argument("non-positive subsystem dimension");
    total *= d;
    if (total > kMaxDim) {
      throw std::invalid_argument("composite dimension exceeds " +
                                  std::to_string(kMaxDim));
    }
  }
  return static_cast<int>(total);
}

StateVector::StateVector(std::vector<int> dims, Vector amps)
    : dims_(std::move(dims)), amps_(std::move(amps)) {
  if (total_dimension(dims_) != amps_.size()) {
    throw std::invalid_argument("amplitude count does not match dims");
  }
}

StateVector StateVector::basis(std::vector<int> dims, int index) {
  const int n = total_dimension(dims);
  if (index < 0 || index >= n) throw std::invalid_argument("basis index out of range");
  Vector v = Vector::Zero(n);
  v(index) = 1.0;
  return StateVector(std::move(dims), std::move(v));
}

StateVector StateVector::qubit(Complex c0, Complex c1) {
  Vector v(2);
  v << c0, c1;
  return StateVector({2}, std::move(v));
}

StateVector StateVector::normalized() const {
  const double n = amps_.norm();
  if (n == 0.0) throw std::logic_error("cannot normalize a zero state");
  return StateVector(dims_, amps_ / n);
}

Operator::Operator(Matrix entries) : Operator(std::move(entries), Tag::kGeneral) {}

Operator::Operator(Matrix entries, Tag tag) : m_(std::move(entries)), tag_(tag) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("operator must be square");
  if (m_.rows() == 0) throw std::invalid_argument("operator must be non-empty");
}

Operator Operator::hermitian(Matrix entries) {
  Operator op(std::move(entries), Tag::kHermitian);
  if (!op.is_hermitian()) throw std::invalid_argument("operator is not Hermitian");
  return op;
}

Operator Operator::unitary(Matrix entries) {
  Operator op(std::move(entries), Tag::kUnitary);
  if (!op.is_unitary()) throw std::invalid_argument("operator is not unitary");
  return op;
}

Operator Operator::identity(int dim) {
  return Operator(Matrix::Identity(dim, dim), Tag::kUnitary);
}

Operator Operator::zero(int dim) {
  return Operator(Matrix::Zero(dim, dim), Tag::kHermitian);
}

Operator Operator::adjoint() const {
  return Operator(m_.adjoint(), tag_);
}

bool Operator::is_hermitian(double tol) const {
  return max_abs(m_ - m_.adjoint()) <= tol;
}

bool Operator::is_unitary(double tol) const {
  const Matrix gram = m_.adjoint() * m_;
  return max_abs(gram - Matrix::Identity(dim(), dim())) <= tol;
}

namespace {

void require_same_dim(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
}

Operator::Tag sum_tag(const Operator& a, const Operator& b) {
  return a.tag() == Operator::Tag::kHermitian && b.tag() == Operator::Tag::kHermitian
             ? Operator::Tag::kHermitian
             : Operator::Tag::kGeneral;
}

}  // namespace

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dim(a, b);
  return Operator(a.m_ + b.m_, sum_tag(a, b));
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_dim(a, b);
  return Operator(a.m_ - b.m_, sum_tag(a, b));
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a, b);
  const bool unitary = a.tag_ == Operator::Tag::kUnitary && b.tag_ == Operator::Tag::kUnitary;
  return Operator(a.m_ * b.m_, unitary ? Operator::Tag::kUnitary : Operator::Tag::kGeneral);
}

Operator operator*(Complex s, const Operator& a) {
  return Operator(s * a.m_, Operator::Tag::kGeneral);
}

Operator operator*(double s, const Operator& a) {
  const auto tag = a.tag_ == Operator::Tag::kHermitian ? Operator::Tag::kHermitian
                                                        : Operator::Tag::kGeneral;
  return Operator(s * a.m_, tag);
}

Operator sigma_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return Operator::hermitian(m);
}

Operator sigma_y() {
  Matrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return Operator::hermitian(m);
}

Operator sigma_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return Operator::hermitian(m);
}

Operator sigma_minus() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  return Operator(m);
}

Operator sigma_plus() { return sigma_minus().adjoint(); }

Operator qubit_projector(int k) {
  if (k != 0 && k != 1) throw std::invalid_argument("qubit level must be 0 or 1");
  Matrix m = Matrix::Zero(2, 2);
  m(k, k) = 1.0;
  return Operator::hermitian(m);
}

Operator tensor_product(const Operator& a, const Operator& b) {
  const int da = a.dim();
  const int db = b.dim();
  if (da * db > kMaxDim) throw std::invalid_argument("tensor product exceeds maximum dimension");
  Matrix m(da * db, da * db);
  for (int i = 0; i < da; ++i) {
    for (int j = 0; j < da; ++j) {
      m.block(i * db, j * db, db, db) = a(i, j) * b.matrix();
    }
  }
  if (a.is_hermitian() && b.is_hermitian()) return Operator::hermitian(m);
  return Operator(m);
}

Operator embed(const Operator& local, int target, std::span<const int> dims) {
  total_dimension(dims);
  if (target < 0 || target >= static_cast<int>(dims.size())) {
    throw std::invalid_argument("embedding target out of range");
  }
  if (local.dim() != dims[target]) {
    throw std::invalid_argument("local operator does not match subsystem dimension");
  }
  Operator out = target == 0 ? local : Operator::identity(dims[0]);
  for (int k = 1; k < static_cast<int>(dims.size()); ++k) {
    out = tensor_product(out, k == target ? local : Operator::identity(dims[k]));
  }
  return out;
}

StateVector apply(const Operator& op, const StateVector& psi) {
  if (op.dim() != psi.size()) throw std::invalid_argument("operator/state dimension mismatch");
  return StateVector(psi.dims(), op.matrix() * psi.amps());
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("state dimension mismatch");
  return a.amps().dot(b.amps());
}

double fidelity(const StateVector& a, const StateVector& b) {
  const double na = a.squared_norm();
  const double nb = b.squared_norm();
  if (na == 0.0 || nb == 0.0) throw std::logic_error("fidelity of a zero state");
  return std::norm(inner(a, b)) / (na * nb);
}

Operator propagator(const Operator& h_eff, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("propagator requires dt >= 0");
  Matrix u = expm(Complex(0.0, -dt) * h_eff.matrix());
  if (h_eff.tag() == Operator::Tag::kHermitian) return Operator::unitary(std::move(u));
  return Operator(std::move(u));
}

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace ecsense
