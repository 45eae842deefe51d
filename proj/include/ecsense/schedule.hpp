#pragma once

#include <optional>
#include <vector>

#include "ecsense/hilbert.hpp"

namespace ecsense {

/// Constant Hamiltonian for `duration`, then an optional instantaneous
/// unitary kick (a pi-pulse) at the segment end.
struct Segment {
  double duration = 0.0;
  Operator hamiltonian;
  std::optional<Operator> kick;
};

/// One error-correction cycle; segments run in order and tile [0, period].
using CycleSchedule = std::vector<Segment>;

double schedule_period(const CycleSchedule& schedule);

/// Throws std::invalid_argument for an empty schedule, non-positive
/// durations, non-Hermitian Hamiltonians, non-unitary kicks, or mixed
/// dimensions.
void validate_schedule(const CycleSchedule& schedule);

}  // namespace ecsense
