#pragma once

// Dense linear algebra on small composite Hilbert spaces.
//
// Every space in this project has dimension <= 16, so matrices and vectors
// use Eigen types with a fixed maximum size: no heap traffic in the
// trajectory inner loop, runtime dimensions everywhere else.
//
// Basis convention: for subsystem dimensions (d_0, d_1, ...), the basis
// index is sum_k s_k * prod_{j>k} d_j, i.e. the first listed subsystem is
// the most significant digit. For the two-qubit code, index = 2*s_sensing +
// s_robust.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ecsense {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 16;

using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor,
                             kMaxDim, 1>;

inline constexpr Complex kI{0.0, 1.0};

/// Tolerance used when a constructor is asked to certify hermiticity.
inline constexpr double kHermitianTol = 1e-12;
/// Tolerance used when a constructor is asked to certify unitarity.
inline constexpr double kUnitaryTol = 1e-10;

/// Product of subsystem dimensions. Throws std::invalid_argument on an empty
/// list, a non-positive entry, or a total above kMaxDim.
int total_dimension(std::span<const int> dims);

class StateVector {
 public:
  StateVector(std::vector<int> dims, Vector amps);

  /// Computational basis state |index> of the composite space.
  static StateVector basis(std::vector<int> dims, int index);
  static StateVector qubit(Complex c0, Complex c1);

  const std::vector<int>& dims() const { return dims_; }
  const Vector& amps() const { return amps_; }
  int size() const { return static_cast<int>(amps_.size()); }
  Complex operator[](int i) const { return amps_(i); }

  double norm() const { return amps_.norm(); }
  double squared_norm() const { return amps_.squaredNorm(); }

  /// Throws std::logic_error if the norm is zero.
  StateVector normalized() const;

 private:
  std::vector<int> dims_;
  Vector amps_;
};

class Operator {
 public:
  enum class Tag { kGeneral, kHermitian, kUnitary };

  /// Untagged square operator. Throws std::invalid_argument if non-square.
  explicit Operator(Matrix entries);

  /// Tagged constructors validate their claim (see kHermitianTol,
  /// kUnitaryTol) and throw std::invalid_argument otherwise.
  static Operator hermitian(Matrix entries);
  static Operator unitary(Matrix entries);

  static Operator identity(int dim);
  static Operator zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Tag tag() const { return tag_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  Operator adjoint() const;
  bool is_hermitian(double tol = kHermitianTol) const;
  bool is_unitary(double tol = kUnitaryTol) const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);
  friend Operator operator*(double s, const Operator& a);

 private:
  Operator(Matrix entries, Tag tag);

  Matrix m_;
  Tag tag_ = Tag::kGeneral;
};

// Single-qubit operators. |1> is the excited state.
Operator sigma_x();
Operator sigma_y();  // [[0, -i], [i, 0]]
Operator sigma_z();  // diag(1, -1)
Operator sigma_minus();  // |0><1|
Operator sigma_plus();   // |1><0|
/// |k><k| on a single qubit.
Operator qubit_projector(int k);

/// Kronecker product, first operand most significant.
Operator tensor_product(const Operator& a, const Operator& b);

/// Lifts a single-subsystem operator onto subsystem `target` of `dims`.
Operator embed(const Operator& local, int target, std::span<const int> dims);

/// Matrix-vector product, not normalized. Throws on dimension mismatch.
StateVector apply(const Operator& op, const StateVector& psi);

/// <a|b>, conjugate-linear in the first argument.
Complex inner(const StateVector& a, const StateVector& b);

/// |<a|b>|^2 / (|a|^2 |b|^2); insensitive to global phase and norm.
double fidelity(const StateVector& a, const StateVector& b);

/// exp(-i dt H) for a possibly non-Hermitian H, by scaling and squaring.
/// Hermitian input yields a unitary result to kUnitaryTol.
Operator propagator(const Operator& h_eff, double dt);

/// exp(A) for a general complex matrix (Pade 13 scaling and squaring).
Matrix expm(const Matrix& a);

/// Largest |a_ij|.
double max_abs(const Matrix& a);

}  // namespace ecsense
