#pragma once

// Error-corrected sensing with an observed environment.
//
// Two-qubit code: subsystem 0 is the sensing qubit (damped, carries the
// signal), subsystem 1 is the robust qubit (noise-free). Each error-correction
// cycle of length dt evolves under the signal plus a compensation strategy,
// samples at most one emission, and after a detected emission re-prepares the
// sensing qubit and applies the recovery unitary V.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecsense/hilbert.hpp"
#include "ecsense/noise.hpp"
#include "ecsense/rng.hpp"
#include "ecsense/schedule.hpp"

namespace ecsense::protocol {

inline constexpr int kSensing = 0;
inline constexpr int kRobust = 1;
inline const std::vector<int> kCodeDims{2, 2};

/// Global sign of both compensation Hamiltonians under this project's
/// conventions (sigma_y = [[0,-i],[i,0]], |1> excited). Pinned by the
/// stationarity tests in tests/test_protocol.cpp.
inline constexpr double kCompensationSign = +1.0;

enum class Mode { kPulsedEcho, kContinuousDrive };

/// Where inside a cycle a sampled emission acts.
///  kResolved: at the time the no-jump norm crosses the drawn threshold; the
///             post-jump state then evolves for the rest of the cycle.
///  kCycleEnd: at the end of the cycle, after all evolution.
/// Both use the same per-cycle Bernoulli decision.
enum class JumpTiming { kResolved, kCycleEnd };

/// Invalid protocol configuration; `field` names the offending parameter.
class ParamError : public std::invalid_argument {
 public:
  ParamError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ProtocolParams {
  double gamma = 1.0;    // amplitude decay rate
  double g = 0.3;        // signal strength (angular frequency)
  double phi = 0.0;      // signal axis angle in the x-y plane
  double dt = 1e-3;      // error-correction cycle length
  double t_final = 2.0;  // total sensing time
  double eta = 1.0;      // detection efficiency
  Mode mode = Mode::kContinuousDrive;
  int n_traj = 1000;
  std::uint64_t master_seed = 42;
  bool corrections = true;
  JumpTiming timing = JumpTiming::kResolved;

  /// Number of cycles N = t_final / dt.
  int cycles() const;
  /// Throws ParamError when any invariant fails.
  void validate() const;
  noise::DampingModel damping() const;
  noise::DetectionModel detection() const;
};

const char* to_string(Mode mode);

class CodeWords {
 public:
  explicit CodeWords(double phi = 0.0);

  double phi() const { return phi_; }
  /// (|0> + e^{i phi}|1>)/sqrt2 (x) |0>
  const StateVector& zero() const { return zero_; }
  /// (|0> - e^{i phi}|1>)/sqrt2 (x) |1>
  const StateVector& one() const { return one_; }

 private:
  double phi_;
  StateVector zero_;
  StateVector one_;
};

/// g (cos phi sigma_x + sin phi sigma_y) (x) I.
Operator signal_hamiltonian(double g, double phi);

/// c0|0_L> + c1|1_L>. Throws std::invalid_argument unless |c0|^2+|c1|^2 = 1
/// to 1e-10.
StateVector encode(Complex c0, Complex c1, const CodeWords& code);

/// Single-qubit drive s*gamma*alpha*beta*sigma_y. With the damping term the
/// direction (alpha, beta) is stationary and the norm decays as
/// exp(-gamma beta^2 t).
Operator compensation_hamiltonian_single(double alpha, double beta, double gamma);

/// s*(gamma/2)(-sin phi sigma_x + cos phi sigma_y) (x) sigma_z: the
/// robust-qubit-controlled drive that keeps both codewords stationary.
Operator compensation_hamiltonian_encoded(double gamma, double phi);

struct Pulse {
  double time;  // within the cycle
  Operator unitary;
};

/// Two pi-pulses per cycle, at dt/2 and dt, about the signal axis
/// cos(phi) sigma_x + sin(phi) sigma_y of the sensing qubit. At phi = 0 this
/// is sigma_x; the rotated axis keeps the pulses commuting with the signal.
std::vector<Pulse> pi_pulse_schedule(double dt, double phi = 0.0);

/// Unitary with V|00> = |0_L>, V|01> = -|1_L>, completed on the
/// complement by Gram-Schmidt over (|10>, |11>).
Operator recovery_unitary(const CodeWords& code);

/// normalize(P0 psi) with P0 = |0><0| on the sensing qubit. Throws
/// std::logic_error on a zero projection.
StateVector reset_sensing_qubit(const StateVector& psi);

/// Optical-pumping re-preparation of the sensing qubit, unravelled: the
/// sensing level k is drawn with probability |P_k psi|^2 and the state becomes
/// normalize(|0><k| psi). Draws one uniform from the stream.
StateVector repump_sensing_qubit(const StateVector& psi, Stream& stream);

/// Cycle schedule (Hamiltonians and pulses) for the given parameters.
CycleSchedule protocol_schedule(const ProtocolParams& params);

/// Noise-free target: (e^{-igt}|0_L> + e^{igt}|1_L>)/sqrt2, the logical-plus
/// state evolved by exp(-i t H_sig).
StateVector ideal_state(const CodeWords& code, double g, double t);

/// Logical-plus start state.
StateVector logical_plus(const CodeWords& code);

/// Precomputed one-cycle unravelling of a schedule with damping. Holds
/// propagators for each segment, a dyadic ladder U(duration / 2^k) used to
/// locate jumps, and the full-cycle map. Immutable after construction.
class CycleEngine {
 public:
  CycleEngine(const CycleSchedule& schedule, const noise::DampingModel& damping);

  double period() const { return period_; }
  const Matrix& cycle_propagator() const { return cycle_; }

  /// Whole cycle under no-jump evolution; psi is left unnormalized.
  void evolve_no_jump(Vector& psi) const;

  /// One cycle with a per-cycle Bernoulli jump decision drawn from the norm
  /// loss. Returns the jump offset within the cycle, or nullopt. psi must be
  /// normalized on entry and is normalized on exit.
  std::optional<double> evolve_sampled(Vector& psi, Stream& stream, JumpTiming timing) const;

  /// One cycle with a jump forced at `offset` in [0, period]. psi is
  /// normalized on exit.
  void evolve_with_jump_at(Vector& psi, double offset) const;

  /// Product of the kicks still ahead of a jump at `offset` in this cycle. A
  /// correction applied at the cycle end must be followed by this frame: on
  /// the code space each pi-pulse is a logical operation that the jumped
  /// state no longer carries.
  Matrix frame_after(double offset) const;

 private:
  struct Stage {
    double duration;
    Matrix generator;  // -i * H_eff
    Matrix step;
    std::vector<Matrix> ladder;
    std::optional<Matrix> kick;
  };

  void finish_from(Vector& psi, std::size_t stage, double elapsed) const;
  void lower(Vector& psi) const;

  std::vector<Stage> stages_;
  Matrix cycle_;
  Matrix lowering_;
  double period_ = 0.0;
};

struct Snapshot {
  int cycle = 0;
  double time = 0.0;
  StateVector state;
  int jumps = 0;     // emissions so far
  int detected = 0;  // detected emissions so far
};

struct TrajectoryRecord {
  ProtocolParams params;
  std::vector<noise::JumpEvent> events;
  std::vector<Snapshot> snapshots;
  StateVector final_state;
};

struct ForcedJump {
  int cycle = 0;
  double offset_fraction = 0.5;  // of dt
  bool detected = true;
};

struct TrajectoryOptions {
  /// Cycle indices in [1, N] after which the state is recorded (sorted).
  std::vector<int> snapshot_cycles;
  std::optional<StateVector> initial;  // defaults to logical plus
  std::optional<ForcedJump> forced_jump;
  bool suppress_random_jumps = false;
  /// When set, snapshots are passed here instead of being stored.
  std::function<void(const Snapshot&)> sink;
};

/// Cycles j*stride for j = 1.. plus the final cycle N, i.e. ceil(N/stride)
/// entries.
std::vector<int> strided_cycles(int n_cycles, int stride);

TrajectoryRecord run_trajectory(const ProtocolParams& params, Stream& stream,
                                const TrajectoryOptions& options = {});

/// Ensemble of params.n_traj trajectories; trajectory i draws from
/// Stream(params.master_seed, i). Results are in trajectory order.
std::vector<TrajectoryRecord> run_ensemble(const ProtocolParams& params,
                                           const TrajectoryOptions& options, int threads);

/// Infidelity between a trajectory with one forced, detected and corrected
/// emission in cycle `jump_cycle` and the jump-free trajectory, both after
/// `jump_cycle + 1 + cycles_after` cycles.
double corrected_jump_infidelity(const ProtocolParams& params, int jump_cycle,
                                 double offset_fraction, int cycles_after);

struct DecayPoint {
  double time;
  double norm;
  double direction_error;
};

/// No-jump evolution of the real single-qubit state (alpha, beta) under the
/// chosen compensation: the drive s*gamma*alpha*beta*sigma_y, or two
/// sigma_x pulses per cycle. One point per cycle (plus t = 0).
std::vector<DecayPoint> single_qubit_decay(double alpha, double beta, double gamma, double dt,
                                           int n_cycles, Mode mode);

/// No-jump evolution of |0_L> with g = 0 under the protocol schedule. One
/// point per cycle (plus t = 0).
std::vector<DecayPoint> codeword_decay(const ProtocolParams& params, int n_cycles,
                                       bool logical_one = false);

/// sqrt(1 - |<a|b>|^2 / (|a|^2 |b|^2)): the angle-like distance between
/// directions, zero iff they agree up to phase.
double direction_error(const StateVector& reference, const StateVector& psi);

}  // namespace ecsense::protocol
