#include "ecsense/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ecsense/noise.hpp"

namespace ecsense::oracle {

DensityMatrix::DensityMatrix(Matrix entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw std::invalid_argument("density matrix must be square and non-empty");
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const StateVector n = psi.normalized();
  return DensityMatrix(n.amps() * n.amps().adjoint());
}

double DensityMatrix::trace() const { return m_.trace().real(); }

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  const Matrix h = (m_ + m_.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double DensityMatrix::expectation(const StateVector& psi) const {
  return psi.amps().dot(m_ * psi.amps()).real();
}

void DensityMatrix::validate() const {
  if (std::abs(trace() - 1.0) > 1e-9) throw NumericalError("density matrix trace != 1");
  if (max_abs(m_ - m_.adjoint()) > 1e-10) throw NumericalError("density matrix not Hermitian");
  if (min_eigenvalue() < -1e-8) throw NumericalError("density matrix not positive");
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("density matrix dimension mismatch");
  Matrix d = a.matrix() - b.matrix();
  d = (d + d.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(d, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

void LindbladModel::validate() const {
  validate_schedule(schedule);
  const int dim = schedule.front().hamiltonian.dim();
  for (const auto& l : jump_ops) {
    if (l.dim() != dim) throw std::invalid_argument("jump operator dimension mismatch");
  }
}

LindbladModel protocol_lindblad_model(const protocol::ProtocolParams& params) {
  return LindbladModel{protocol::protocol_schedule(params),
                       {noise::jump_operator(params.damping())}};
}

namespace {

struct Generator {
  Matrix h;
  std::vector<Matrix> l;
  std::vector<Matrix> l_dag;
  Matrix half_decay;  // (1/2) sum L^+ L

  Matrix operator()(const Matrix& rho) const {
    Matrix out = Complex(0.0, -1.0) * (h * rho - rho * h);
    out -= half_decay * rho + rho * half_decay;
    for (std::size_t k = 0; k < l.size(); ++k) out += l[k] * rho * l_dag[k];
    return out;
  }
};

}  // namespace

DensityMatrix lindblad_evolve(const DensityMatrix& rho, const LindbladModel& model, double dt,
                              int substeps) {
  model.validate();
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const double period = schedule_period(model.schedule);
  if (std::abs(period - dt) > 1e-12 * std::max(1.0, dt)) {
    throw std::invalid_argument("schedule does not cover [0, dt]");
  }
  if (rho.dim() != model.schedule.front().hamiltonian.dim()) {
    throw std::invalid_argument("density matrix does not match model dimension");
  }

  const int dim = rho.dim();
  Matrix decay = Matrix::Zero(dim, dim);
  std::vector<Matrix> ls, ls_dag;
  for (const auto& l : model.jump_ops) {
    ls.push_back(l.matrix());
    ls_dag.push_back(l.matrix().adjoint());
    decay += ls_dag.back() * ls.back();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> rate_solver(decay, Eigen::EigenvaluesOnly);
  const double rate = rate_solver.eigenvalues().cwiseAbs().maxCoeff();

  const double trace_in = rho.trace();
  Matrix r = rho.matrix();
  for (const auto& seg : model.schedule) {
    const int n = std::max(1, static_cast<int>(std::lround(substeps * seg.duration / dt)));
    const double h = seg.duration / n;
    if (rate * h > 0.05 + 1e-12) {
      throw std::invalid_argument("RK4 substep too coarse for the decay rate");
    }
    const Generator gen{seg.hamiltonian.matrix(), ls, ls_dag, decay / 2.0};
    for (int s = 0; s < n; ++s) {
      const Matrix k1 = gen(r);
      const Matrix k2 = gen(r + (h / 2.0) * k1);
      const Matrix k3 = gen(r + (h / 2.0) * k2);
      const Matrix k4 = gen(r + h * k3);
      r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (seg.kick) r = seg.kick->matrix() * r * seg.kick->matrix().adjoint();
  }

  const double drift = std::abs(r.trace().real() - trace_in);
  if (drift > 1e-6) throw NumericalError("trace drift exceeds 1e-6; use more substeps");
  if (drift <= 1e-9) r *= trace_in / r.trace().real();
  return DensityMatrix(std::move(r));
}

DampingSolution analytic_damping(Complex alpha, Complex beta, double gamma, double t) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-10) {
    throw std::invalid_argument("|alpha|^2 + |beta|^2 must equal 1");
  }
  return {StateVector::qubit(alpha, beta * std::exp(-gamma * t)),
          std::norm(beta) * (1.0 - std::exp(-2.0 * gamma * t))};
}

namespace {

bool same_params(const protocol::ProtocolParams& a, const protocol::ProtocolParams& b) {
  return a.gamma == b.gamma && a.g == b.g && a.phi == b.phi && a.dt == b.dt &&
         a.t_final == b.t_final && a.eta == b.eta && a.mode == b.mode &&
         a.corrections == b.corrections && a.timing == b.timing;
}

}  // namespace

DensityMatrix trajectory_average(std::span<const protocol::TrajectoryRecord> records,
                                 double time) {
  if (records.empty()) throw std::invalid_argument("no trajectories to average");
  const double tol = 1e-9 * std::max(1.0, std::abs(time));
  const int dim = records.front().final_state.size();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& rec : records) {
    if (!same_params(rec.params, records.front().params)) {
      throw std::invalid_argument("trajectories do not share parameters");
    }
    const auto it = std::find_if(rec.snapshots.begin(), rec.snapshots.end(),
                                 [&](const auto& s) { return std::abs(s.time - time) <= tol; });
    if (it == rec.snapshots.end()) throw std::invalid_argument("missing snapshot at requested time");
    const Vector psi = it->state.amps() / it->state.norm();
    sum += psi * psi.adjoint();
  }
  return DensityMatrix(sum / static_cast<double>(records.size()));
}

}  // namespace ecsense::oracle
