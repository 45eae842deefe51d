#pragma once

// Deterministic ground truth for the trajectory simulator: RK4 integration of
// the Lindblad master equation over the same cycle schedules, and the closed
// form of single-qubit amplitude damping.

#include <span>
#include <stdexcept>
#include <vector>

#include "ecsense/hilbert.hpp"
#include "ecsense/protocol.hpp"
#include "ecsense/schedule.hpp"

namespace ecsense::oracle {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);
  static DensityMatrix pure(const StateVector& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  double trace() const;
  double purity() const;
  double min_eigenvalue() const;
  /// <psi|rho|psi> for a normalized psi.
  double expectation(const StateVector& psi) const;

  /// Throws NumericalError unless trace = 1 to 1e-9, Hermitian to 1e-10 and
  /// the smallest eigenvalue is >= -1e-8.
  void validate() const;

 private:
  Matrix m_;
};

/// 1/2 * sum |eig(a - b)|.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct LindbladModel {
  CycleSchedule schedule;
  std::vector<Operator> jump_ops;

  void validate() const;
};

/// Master-equation counterpart of a protocol configuration with corrections
/// disabled: same cycle schedule, single jump operator sqrt(2 gamma) sigma_-
/// on the sensing qubit.
LindbladModel protocol_lindblad_model(const protocol::ProtocolParams& params);

/// One cycle of d rho/dt = -i[H, rho] + sum_k (L rho L^+ - {L^+ L, rho}/2),
/// RK4 with `substeps` steps spread over the segments; kicks act as
/// rho -> U rho U^+. dt must equal the schedule period.
/// Throws std::invalid_argument if a substep exceeds the rate bound
/// (||sum L^+L|| * h <= 0.05) and NumericalError on trace drift > 1e-6.
DensityMatrix lindblad_evolve(const DensityMatrix& rho, const LindbladModel& model, double dt,
                              int substeps);

struct DampingSolution {
  StateVector no_jump_branch;  // unnormalized (alpha, beta e^{-gamma t})
  double branch_weight;        // |beta|^2 (1 - e^{-2 gamma t})
};

DampingSolution analytic_damping(Complex alpha, Complex beta, double gamma, double t);

/// (1/n) sum_i |psi_i><psi_i| over the snapshots taken at `time`. Throws
/// std::invalid_argument if any record lacks that snapshot or the records
/// disagree on parameters.
DensityMatrix trajectory_average(std::span<const protocol::TrajectoryRecord> records,
                                 double time);

}  // namespace ecsense::oracle
