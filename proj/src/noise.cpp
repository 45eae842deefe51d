#include "ecsense/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecsense::noise {

void DampingModel::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  total_dimension(dims);
  if (target < 0 || target >= static_cast<int>(dims.size())) {
    throw std::invalid_argument("damping target out of range");
  }
  if (dims[target] != 2) throw std::invalid_argument("damping target must be a qubit");
}

void DetectionModel::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
}

Operator excited_projector(const DampingModel& model) {
  model.validate();
  return embed(qubit_projector(1), model.target, model.dims);
}

Operator jump_operator(const DampingModel& model) {
  model.validate();
  return std::sqrt(kJumpRateFactor * model.gamma) *
         embed(sigma_minus(), model.target, model.dims);
}

Operator effective_hamiltonian(const Operator& h_coherent, const DampingModel& model) {
  const Operator p1 = excited_projector(model);
  if (h_coherent.dim() != p1.dim()) {
    throw std::invalid_argument("Hamiltonian does not match the damping model space");
  }
  // (1/2) L^dagger L = gamma |1><1|.
  return Operator(h_coherent.matrix() - kI * model.gamma * p1.matrix());
}

NoJumpStep step_no_jump(const StateVector& psi, const Operator& h_eff, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_no_jump requires dt > 0");
  return step_no_jump(psi, propagator(h_eff, dt));
}

NoJumpStep step_no_jump(const StateVector& psi, const Operator& step_propagator) {
  StateVector next = apply(step_propagator, psi);
  const double p = std::clamp(psi.squared_norm() - next.squared_norm(), 0.0, 1.0);
  return {std::move(next), p};
}

StateVector apply_jump(const StateVector& psi, const DampingModel& model) {
  const Operator lowering = embed(sigma_minus(), model.target, model.dims);
  StateVector jumped = apply(lowering, psi);
  if (jumped.squared_norm() == 0.0) {
    throw std::logic_error("jump sampled from a state with no excited component");
  }
  return jumped.normalized();
}

bool sample_detection(bool event_occurred, const DetectionModel& det, Stream& stream) {
  if (!event_occurred) return false;
  det.validate();
  return stream.uniform() < det.eta;
}

}  // namespace ecsense::noise
