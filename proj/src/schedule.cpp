#include "ecsense/schedule.hpp"

#include <stdexcept>

namespace ecsense {

double schedule_period(const CycleSchedule& schedule) {
  double total = 0.0;
  for (const auto& seg : schedule) total += seg.duration;
  return total;
}

void validate_schedule(const CycleSchedule& schedule) {
  if (schedule.empty()) throw std::invalid_argument("empty cycle schedule");
  const int dim = schedule.front().hamiltonian.dim();
  for (const auto& seg : schedule) {
    if (!(seg.duration > 0.0)) throw std::invalid_argument("segment duration must be > 0");
    if (seg.hamiltonian.dim() != dim) throw std::invalid_argument("segment dimension mismatch");
    if (!seg.hamiltonian.is_hermitian()) {
      throw std::invalid_argument("segment Hamiltonian must be Hermitian");
    }
    if (seg.kick) {
      if (seg.kick->dim() != dim) throw std::invalid_argument("kick dimension mismatch");
      if (!seg.kick->is_unitary()) throw std::invalid_argument("kick must be unitary");
    }
  }
}

}  // namespace ecsense
