#include "ecsense/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecsense/ensemble.hpp"

namespace ecsense::protocol {
namespace {

constexpr int kLadderDepth = 36;

Operator on_sensing(const Operator& local) { return embed(local, kSensing, kCodeDims); }

Operator signal_axis(double phi) {
  return std::cos(phi) * sigma_x() + std::sin(phi) * sigma_y();
}

// Zeroes every amplitude whose sensing digit differs from `level`.
void keep_sensing_level(Vector& psi, int level) {
  const int half = static_cast<int>(psi.size()) / 2;
  if (level == 0) {
    psi.tail(half).setZero();
  } else {
    psi.head(half).setZero();
  }
}

}  // namespace

int ProtocolParams::cycles() const {
  return static_cast<int>(std::llround(t_final / dt));
}

void ProtocolParams::validate() const {
  if (!std::isfinite(gamma) || gamma < 0.0) throw ParamError("gamma", "gamma must be >= 0");
  if (!std::isfinite(g)) throw ParamError("g", "g must be finite");
  if (!std::isfinite(phi)) throw ParamError("phi", "phi must be finite");
  if (!std::isfinite(dt) || dt <= 0.0) throw ParamError("dt", "dt must be > 0");
  if (!std::isfinite(t_final) || t_final <= 0.0) {
    throw ParamError("t_final", "t_final must be > 0");
  }
  if (noise::kJumpRateFactor * gamma * dt > noise::kMaxJumpProbabilityPerStep + 1e-12) {
    throw ParamError("dt", "2*gamma*dt = " + std::to_string(2.0 * gamma * dt) +
                               " exceeds " + std::to_string(noise::kMaxJumpProbabilityPerStep));
  }
  if (std::abs(g) * dt > 0.2 + 1e-12) {
    throw ParamError("dt", "g*dt = " + std::to_string(std::abs(g) * dt) + " exceeds 0.2");
  }
  const double n = std::round(t_final / dt);
  if (n < 1.0 || std::abs(n * dt - t_final) > 1e-9 * std::max(1.0, t_final)) {
    throw ParamError("t_final", "t_final must be an integer multiple (>= 1) of dt");
  }
  if (n > 2e9) throw ParamError("t_final", "too many cycles");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParamError("eta", "eta must lie in [0, 1]");
  if (n_traj < 1) throw ParamError("n_traj", "trajectory count must be >= 1");
}

noise::DampingModel ProtocolParams::damping() const {
  return noise::DampingModel{gamma, kSensing, kCodeDims};
}

noise::DetectionModel ProtocolParams::detection() const {
  return noise::DetectionModel{eta, master_seed};
}

const char* to_string(Mode mode) {
  return mode == Mode::kPulsedEcho ? "echo" : "drive";
}

CodeWords::CodeWords(double phi)
    : phi_(phi),
      zero_(StateVector::basis(kCodeDims, 0)),
      one_(StateVector::basis(kCodeDims, 1)) {
  const double r = std::numbers::sqrt2 / 2.0;
  const Complex e = std::polar(1.0, phi);
  Vector z = Vector::Zero(4);
  z(0) = r;       // |00>
  z(2) = r * e;   // |10>
  Vector o = Vector::Zero(4);
  o(1) = r;       // |01>
  o(3) = -r * e;  // |11>
  zero_ = StateVector(kCodeDims, z);
  one_ = StateVector(kCodeDims, o);
}

Operator signal_hamiltonian(double g, double phi) {
  return on_sensing(g * signal_axis(phi));
}

StateVector encode(Complex c0, Complex c1, const CodeWords& code) {
  const double n2 = std::norm(c0) + std::norm(c1);
  if (std::abs(n2 - 1.0) > 1e-10) {
    throw std::invalid_argument("logical amplitudes must be normalized");
  }
  return StateVector(kCodeDims, c0 * code.zero().amps() + c1 * code.one().amps());
}

Operator compensation_hamiltonian_single(double alpha, double beta, double gamma) {
  if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-10) {
    throw std::invalid_argument("alpha^2 + beta^2 must equal 1");
  }
  return (kCompensationSign * gamma * alpha * beta) * sigma_y();
}

Operator compensation_hamiltonian_encoded(double gamma, double phi) {
  const Operator perpendicular = -std::sin(phi) * sigma_x() + std::cos(phi) * sigma_y();
  return (kCompensationSign * gamma / 2.0) * tensor_product(perpendicular, sigma_z());
}

std::vector<Pulse> pi_pulse_schedule(double dt, double phi) {
  if (!(dt > 0.0)) throw std::invalid_argument("pulse schedule requires dt > 0");
  const Operator pulse = Operator::unitary(on_sensing(signal_axis(phi)).matrix());
  return {Pulse{dt / 2.0, pulse}, Pulse{dt, pulse}};
}

Operator recovery_unitary(const CodeWords& code) {
  Matrix v = Matrix::Zero(4, 4);
  v.col(0) = code.zero().amps();
  v.col(1) = -code.one().amps();
  int filled = 2;
  for (int candidate : {2, 3}) {
    Vector col = Vector::Zero(4);
    col(candidate) = 1.0;
    for (int k = 0; k < filled; ++k) col -= v.col(k).dot(col) * v.col(k);
    const double n = col.norm();
    if (n < 1e-8) continue;
    v.col(filled++) = col / n;
  }
  if (filled != 4) throw std::logic_error("Gram-Schmidt completion failed");
  return Operator::unitary(v);
}

StateVector reset_sensing_qubit(const StateVector& psi) {
  if (psi.dims() != kCodeDims) throw std::invalid_argument("expected a two-qubit code state");
  Vector amps = psi.amps();
  keep_sensing_level(amps, 0);
  const double n = amps.norm();
  if (n == 0.0) throw std::logic_error("sensing qubit has no ground-state component");
  return StateVector(kCodeDims, amps / n);
}

StateVector repump_sensing_qubit(const StateVector& psi, Stream& stream) {
  if (psi.dims() != kCodeDims) throw std::invalid_argument("expected a two-qubit code state");
  const Vector& a = psi.amps();
  const double p0 = a.head(2).squaredNorm();
  const double total = a.squaredNorm();
  if (total == 0.0) throw std::logic_error("cannot re-prepare a zero state");
  const bool ground = stream.uniform() * total < p0;
  Vector out = Vector::Zero(4);
  // |0><k| moves the retained sensing level to the ground state.
  out.head(2) = ground ? a.head(2) : a.tail(2);
  return StateVector(kCodeDims, out / out.norm());
}

CycleSchedule protocol_schedule(const ProtocolParams& params) {
  const Operator h_sig = signal_hamiltonian(params.g, params.phi);
  if (params.mode == Mode::kContinuousDrive) {
    return {Segment{params.dt, h_sig + compensation_hamiltonian_encoded(params.gamma, params.phi),
                    std::nullopt}};
  }
  CycleSchedule schedule;
  double start = 0.0;
  for (const auto& pulse : pi_pulse_schedule(params.dt, params.phi)) {
    schedule.push_back(Segment{pulse.time - start, h_sig, pulse.unitary});
    start = pulse.time;
  }
  return schedule;
}

StateVector ideal_state(const CodeWords& code, double g, double t) {
  const double r = std::numbers::sqrt2 / 2.0;
  return encode(r * std::polar(1.0, -g * t), r * std::polar(1.0, g * t), code);
}

StateVector logical_plus(const CodeWords& code) { return ideal_state(code, 0.0, 0.0); }

CycleEngine::CycleEngine(const CycleSchedule& schedule, const noise::DampingModel& damping) {
  validate_schedule(schedule);
  damping.validate();
  lowering_ = embed(sigma_minus(), damping.target, damping.dims).matrix();
  const int dim = schedule.front().hamiltonian.dim();
  if (lowering_.rows() != dim) throw std::invalid_argument("damping model does not match schedule");
  cycle_ = Matrix::Identity(dim, dim);
  for (const auto& seg : schedule) {
    Stage st;
    st.duration = seg.duration;
    st.generator = Complex(0.0, -1.0) *
                   noise::effective_hamiltonian(seg.hamiltonian, damping).matrix();
    st.step = expm(st.generator * seg.duration);
    st.ladder.reserve(kLadderDepth);
    for (int k = 1; k <= kLadderDepth; ++k) {
      st.ladder.push_back(expm(st.generator * std::ldexp(seg.duration, -k)));
    }
    if (seg.kick) st.kick = seg.kick->matrix();
    cycle_ = st.step * cycle_;
    if (st.kick) cycle_ = *st.kick * cycle_;
    period_ += seg.duration;
    stages_.push_back(std::move(st));
  }
}

void CycleEngine::evolve_no_jump(Vector& psi) const { psi = cycle_ * psi; }

void CycleEngine::lower(Vector& psi) const {
  psi = lowering_ * psi;
  const double n = psi.norm();
  if (n == 0.0) throw std::logic_error("jump sampled from a state with no excited component");
  psi /= n;
}

// Evolves a post-jump state through the rest of stage `stage` (from `elapsed`
// inside it) and all later stages, without further jumps.
void CycleEngine::finish_from(Vector& psi, std::size_t stage, double elapsed) const {
  const Stage& cur = stages_[stage];
  const double remaining = cur.duration - elapsed;
  if (remaining > 0.0) psi = expm(cur.generator * remaining) * psi;
  if (cur.kick) psi = *cur.kick * psi;
  for (std::size_t s = stage + 1; s < stages_.size(); ++s) {
    psi = stages_[s].step * psi;
    if (stages_[s].kick) psi = *stages_[s].kick * psi;
  }
  psi.normalize();
}

std::optional<double> CycleEngine::evolve_sampled(Vector& psi, Stream& stream,
                                                  JumpTiming timing) const {
  Vector end = cycle_ * psi;
  const double kept = end.squaredNorm();
  const double p_jump = std::clamp(1.0 - kept, 0.0, 1.0);
  const double u = stream.uniform();
  if (u >= p_jump) {
    psi = end / std::sqrt(kept);
    return std::nullopt;
  }
  if (timing == JumpTiming::kCycleEnd) {
    lower(end);
    psi = end;
    return period_;
  }

  // The jump happens where the no-jump norm^2 first drops to 1 - u; given
  // u < p_jump that threshold lies inside this cycle.
  const double threshold = 1.0 - u;
  double start = 0.0;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const Stage& st = stages_[s];
    Vector after = st.step * psi;
    if (after.squaredNorm() > threshold && s + 1 < stages_.size()) {
      psi = st.kick ? Vector(*st.kick * after) : after;
      start += st.duration;
      continue;
    }
    double tau = 0.0;
    for (int k = 0; k < kLadderDepth; ++k) {
      Vector trial = st.ladder[k] * psi;
      if (trial.squaredNorm() > threshold) {
        psi = trial;
        tau += std::ldexp(st.duration, -(k + 1));
      }
    }
    lower(psi);
    finish_from(psi, s, tau);
    return start + tau;
  }
  return std::nullopt;  // unreachable: the last stage always resolves
}

void CycleEngine::evolve_with_jump_at(Vector& psi, double offset) const {
  if (!(offset >= 0.0 && offset <= period_)) {
    throw std::invalid_argument("forced jump offset outside the cycle");
  }
  double start = 0.0;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const Stage& st = stages_[s];
    if (offset > start + st.duration && s + 1 < stages_.size()) {
      psi = st.step * psi;
      if (st.kick) psi = *st.kick * psi;
      start += st.duration;
      continue;
    }
    const double tau = std::clamp(offset - start, 0.0, st.duration);
    psi = expm(st.generator * tau) * psi;
    lower(psi);
    finish_from(psi, s, tau);
    return;
  }
}

Matrix CycleEngine::frame_after(double offset) const {
  const auto dim = cycle_.rows();
  Matrix frame = Matrix::Identity(dim, dim);
  double start = 0.0;
  std::size_t s = 0;
  while (s + 1 < stages_.size() && offset > start + stages_[s].duration) {
    start += stages_[s].duration;
    ++s;
  }
  for (; s < stages_.size(); ++s) {
    if (stages_[s].kick) frame = *stages_[s].kick * frame;
  }
  return frame;
}

std::vector<int> strided_cycles(int n_cycles, int stride) {
  if (n_cycles < 1 || stride < 1) throw std::invalid_argument("invalid snapshot stride");
  std::vector<int> out;
  for (int c = stride; c < n_cycles; c += stride) out.push_back(c);
  out.push_back(n_cycles);
  return out;
}

TrajectoryRecord run_trajectory(const ProtocolParams& params, Stream& stream,
                                const TrajectoryOptions& options) {
  params.validate();
  const CodeWords code(params.phi);
  const CycleEngine engine(protocol_schedule(params), params.damping());
  const noise::DetectionModel detection = params.detection();
  const Matrix recovery = recovery_unitary(code).matrix();
  const int n_cycles = params.cycles();

  Vector psi = options.initial ? options.initial->normalized().amps() : logical_plus(code).amps();
  if (psi.size() != 4) throw std::invalid_argument("initial state must be a two-qubit state");

  TrajectoryRecord record{params, {}, {}, StateVector(kCodeDims, psi)};
  record.snapshots.reserve(options.snapshot_cycles.size());
  std::size_t next_snapshot = 0;
  int jumps = 0;
  int detected_count = 0;

  for (int c = 0; c < n_cycles; ++c) {
    std::optional<double> offset;
    bool detected = false;
    if (options.forced_jump && options.forced_jump->cycle == c) {
      offset = options.forced_jump->offset_fraction * params.dt;
      engine.evolve_with_jump_at(psi, *offset);
      detected = options.forced_jump->detected;
    } else if (options.suppress_random_jumps) {
      engine.evolve_no_jump(psi);
      psi.normalize();
    } else {
      offset = engine.evolve_sampled(psi, stream, params.timing);
      if (offset) detected = noise::sample_detection(true, detection, stream);
    }

    if (offset) {
      const bool corrected = detected && params.corrections;
      if (corrected) {
        psi = repump_sensing_qubit(StateVector(kCodeDims, psi), stream).amps();
        psi = engine.frame_after(*offset) * (recovery * psi);
        psi.normalize();
      }
      record.events.push_back({c * params.dt + *offset, detected, corrected});
      ++jumps;
      if (detected) ++detected_count;
    }

    while (next_snapshot < options.snapshot_cycles.size() &&
           options.snapshot_cycles[next_snapshot] == c + 1) {
      Snapshot snap{c + 1, (c + 1) * params.dt, StateVector(kCodeDims, psi), jumps,
                    detected_count};
      if (options.sink) {
        options.sink(snap);
      } else {
        record.snapshots.push_back(std::move(snap));
      }
      ++next_snapshot;
    }
  }
  record.final_state = StateVector(kCodeDims, psi);
  return record;
}

std::vector<TrajectoryRecord> run_ensemble(const ProtocolParams& params,
                                           const TrajectoryOptions& options, int threads) {
  params.validate();
  return parallel_map<TrajectoryRecord>(
      static_cast<std::size_t>(params.n_traj), threads, [&](std::size_t i) {
        Stream stream(params.master_seed, i);
        return run_trajectory(params, stream, options);
      });
}

double corrected_jump_infidelity(const ProtocolParams& params, int jump_cycle,
                                 double offset_fraction, int cycles_after) {
  if (jump_cycle < 0 || cycles_after < 0) throw std::invalid_argument("negative cycle count");
  ProtocolParams p = params;
  p.t_final = (jump_cycle + 1 + cycles_after) * params.dt;
  p.eta = 1.0;
  p.corrections = true;

  TrajectoryOptions clean;
  clean.suppress_random_jumps = true;
  TrajectoryOptions forced = clean;
  forced.forced_jump = ForcedJump{jump_cycle, offset_fraction, true};

  Stream s1(p.master_seed, 0);
  Stream s2(p.master_seed, 0);
  const auto reference = run_trajectory(p, s1, clean);
  const auto jumped = run_trajectory(p, s2, forced);
  return 1.0 - fidelity(reference.final_state, jumped.final_state);
}

double direction_error(const StateVector& reference, const StateVector& psi) {
  return std::sqrt(std::max(0.0, 1.0 - fidelity(reference, psi)));
}

namespace {

std::vector<DecayPoint> no_jump_series(const CycleEngine& engine, const StateVector& start,
                                       double dt, int n_cycles) {
  std::vector<DecayPoint> out;
  out.reserve(n_cycles + 1);
  Vector psi = start.amps();
  out.push_back({0.0, psi.norm(), 0.0});
  for (int c = 1; c <= n_cycles; ++c) {
    engine.evolve_no_jump(psi);
    out.push_back({c * dt, psi.norm(), direction_error(start, StateVector(start.dims(), psi))});
  }
  return out;
}

}  // namespace

std::vector<DecayPoint> single_qubit_decay(double alpha, double beta, double gamma, double dt,
                                           int n_cycles, Mode mode) {
  if (!(dt > 0.0) || n_cycles < 0) throw std::invalid_argument("invalid decay-demo grid");
  CycleSchedule schedule;
  if (mode == Mode::kContinuousDrive) {
    schedule.push_back({dt, compensation_hamiltonian_single(alpha, beta, gamma), std::nullopt});
  } else {
    const Operator flip = Operator::unitary(sigma_x().matrix());
    schedule.push_back({dt / 2.0, Operator::zero(2), flip});
    schedule.push_back({dt / 2.0, Operator::zero(2), flip});
  }
  const CycleEngine engine(schedule, noise::DampingModel{gamma, 0, {2}});
  return no_jump_series(engine, StateVector::qubit(alpha, beta), dt, n_cycles);
}

std::vector<DecayPoint> codeword_decay(const ProtocolParams& params, int n_cycles,
                                       bool logical_one) {
  ProtocolParams p = params;
  p.g = 0.0;
  const CodeWords code(p.phi);
  const CycleEngine engine(protocol_schedule(p), p.damping());
  return no_jump_series(engine, logical_one ? code.one() : code.zero(), p.dt, n_cycles);
}

}  // namespace ecsense::protocol
