#pragma once

// Amplitude-damping unfolding of spontaneous emission.
//
// Rate convention (single source of truth for the whole project): gamma is
// the AMPLITUDE decay rate. The excited-state population decays as
// exp(-2 gamma t), the jump operator is L = sqrt(2 gamma) sigma_minus on the
// target qubit, and the anti-Hermitian part of the no-jump Hamiltonian is
// -i gamma |1><1|_target.

#include <cstdint>
#include <vector>

#include "ecsense/hilbert.hpp"
#include "ecsense/rng.hpp"

namespace ecsense::noise {

/// L = sqrt(kJumpRateFactor * gamma) sigma_minus.
inline constexpr double kJumpRateFactor = 2.0;

/// Largest 2*gamma*dt for which one jump per step is an acceptable model.
inline constexpr double kMaxJumpProbabilityPerStep = 0.2;

struct DampingModel {
  double gamma = 0.0;
  int target = 0;
  std::vector<int> dims{2};

  /// Throws std::invalid_argument if gamma < 0 or the target is not a qubit.
  void validate() const;
};

struct JumpEvent {
  double time = 0.0;
  bool detected = false;
  bool corrected = false;
};

struct DetectionModel {
  double eta = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// |1><1| on the target qubit, embedded in the composite space.
Operator excited_projector(const DampingModel& model);

/// sqrt(2 gamma) sigma_minus on the target qubit.
Operator jump_operator(const DampingModel& model);

/// h_coherent - i gamma |1><1|_target.
Operator effective_hamiltonian(const Operator& h_coherent, const DampingModel& model);

struct NoJumpStep {
  StateVector psi;  // unnormalized
  double p_jump = 0.0;
};

/// Evolves psi for dt under the non-Hermitian h_eff. p_jump is the norm loss,
/// clamped to [0, 1].
NoJumpStep step_no_jump(const StateVector& psi, const Operator& h_eff, double dt);

/// Same, with the propagator exp(-i dt h_eff) already computed.
NoJumpStep step_no_jump(const StateVector& psi, const Operator& step_propagator);

/// normalize(sigma_minus_target psi). Throws std::logic_error when psi has no
/// excited component on the target.
StateVector apply_jump(const StateVector& psi, const DampingModel& model);

/// Bernoulli(eta) draw when an event occurred; false otherwise. Consumes one
/// uniform from the stream only if the event occurred.
bool sample_detection(bool event_occurred, const DetectionModel& det, Stream& stream);

}  // namespace ecsense::noise
