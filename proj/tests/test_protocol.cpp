#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "ecsense/estimate.hpp"
#include "ecsense/protocol.hpp"

using namespace ecsense;
using namespace ecsense::protocol;

namespace {

double direction_drift(const CycleSchedule& schedule, const StateVector& start, double gamma,
                       int cycles) {
  const CycleEngine engine(schedule, noise::DampingModel{gamma, 0, start.dims()});
  Vector psi = start.amps();
  for (int c = 0; c < cycles; ++c) engine.evolve_no_jump(psi);
  return direction_error(start, StateVector(start.dims(), psi));
}

ProtocolParams quiet(Mode mode) {
  ProtocolParams p;
  p.mode = mode;
  p.t_final = 0.2;
  p.n_traj = 32;
  return p;
}

}  // namespace

TEST_CASE("codewords are orthonormal eigenstates of the signal") {
  for (double phi : {0.0, 0.5, 2.5}) {
    const CodeWords code(phi);
    CHECK(std::abs(inner(code.zero(), code.one())) < 1e-15);
    CHECK(code.zero().norm() == doctest::Approx(1.0));
    const Operator h = signal_hamiltonian(0.3, phi);
    CHECK((apply(h, code.zero()).amps() - 0.3 * code.zero().amps()).norm() < 1e-15);
    CHECK((apply(h, code.one()).amps() + 0.3 * code.one().amps()).norm() < 1e-15);
  }
}

TEST_CASE("encode checks normalization") {
  const CodeWords code;
  CHECK_NOTHROW(encode(0.6, 0.8, code));
  CHECK_THROWS_AS(encode(1.0, 1.0, code), std::invalid_argument);
}

TEST_CASE("compensation sign: the chosen sign is stationary, the opposite is not") {
  const double gamma = 1.0, dt = 1e-3, alpha = 0.6, beta = 0.8;
  const StateVector start = StateVector::qubit(alpha, beta);
  const Operator h = compensation_hamiltonian_single(alpha, beta, gamma);
  CHECK(direction_drift({{dt, h, std::nullopt}}, start, gamma, 100) < 1e-6);
  CHECK(direction_drift({{dt, -1.0 * h, std::nullopt}}, start, gamma, 100) > 1e-3);

  const StateVector zl = CodeWords(0.0).zero();
  const Operator he = compensation_hamiltonian_encoded(gamma, 0.0);
  CHECK(direction_drift({{dt, he, std::nullopt}}, zl, gamma, 100) < 1e-6);
  CHECK(direction_drift({{dt, -1.0 * he, std::nullopt}}, zl, gamma, 100) > 1e-3);
}

TEST_CASE("single-qubit drive: norm decays as exp(-gamma beta^2 t)") {
  const auto series = single_qubit_decay(0.6, 0.8, 1.0, 1e-3, 200, Mode::kContinuousDrive);
  for (const auto& p : series) {
    CHECK(std::abs(p.norm - std::exp(-0.64 * p.time)) < 1e-12);
    CHECK(p.direction_error < 1e-6);
  }
}

TEST_CASE("one echo cycle halves the decay symmetrically") {
  const double gamma = 1.0, dt = 0.01;
  const auto series = single_qubit_decay(0.6, 0.8, gamma, dt, 1, Mode::kPulsedEcho);
  CHECK(series[1].norm == doctest::Approx(std::exp(-gamma * dt / 2)).epsilon(1e-13));
  CHECK(series[1].direction_error < 1e-7);
}

TEST_CASE("pi-pulse schedule") {
  const auto pulses = pi_pulse_schedule(0.02);
  REQUIRE(pulses.size() == 2);
  CHECK(pulses[0].time == doctest::Approx(0.01));
  CHECK(pulses[1].time == doctest::Approx(0.02));
  const Matrix both = pulses[1].unitary.matrix() * pulses[0].unitary.matrix();
  CHECK(std::abs(std::abs(both(0, 0)) - 1.0) < 1e-15);
  CHECK(max_abs(both - both(0, 0) * Matrix::Identity(4, 4)) < 1e-15);
}

TEST_CASE("recovery unitary") {
  for (double phi : {0.0, 1.3}) {
    const CodeWords code(phi);
    const Operator v = recovery_unitary(code);
    CHECK(v.is_unitary());
    CHECK((apply(v, StateVector::basis(kCodeDims, 0)).amps() - code.zero().amps()).norm() <
          1e-15);
    CHECK((apply(v, StateVector::basis(kCodeDims, 1)).amps() + code.one().amps()).norm() <
          1e-15);
  }
}

TEST_CASE("re-preparing the sensing qubit") {
  CHECK_THROWS_AS(reset_sensing_qubit(StateVector::basis(kCodeDims, 3)), std::logic_error);
  const auto r = reset_sensing_qubit(StateVector(kCodeDims, Vector::Constant(4, 0.5)));
  CHECK(std::abs(r[0] - std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(r[2]) == 0.0);

  Stream s(1, 0);
  const auto pumped = repump_sensing_qubit(StateVector::basis(kCodeDims, 3), s);
  CHECK(std::abs(pumped[1] - 1.0) < 1e-15);
}

TEST_CASE("noise-free runs track the ideal state") {
  for (Mode mode : {Mode::kContinuousDrive, Mode::kPulsedEcho}) {
    for (double phi : {0.0, 0.8}) {
      ProtocolParams p = quiet(mode);
      p.gamma = 0.0;
      p.phi = phi;
      p.t_final = 1.0;
      Stream s(0, 0);
      const auto rec = run_trajectory(p, s);
      const CodeWords code(phi);
      CHECK(rec.events.empty());
      CHECK(fidelity(ideal_state(code, p.g, p.t_final), rec.final_state) > 1.0 - 1e-12);
      CHECK(estimate::logical_phase(rec.final_state, code) ==
            doctest::Approx(2 * p.g * p.t_final).epsilon(1e-10));
    }
  }
}

TEST_CASE("undetected jumps are never corrected") {
  ProtocolParams p = quiet(Mode::kContinuousDrive);
  p.eta = 0.0;
  p.t_final = 2.0;
  int jumps = 0;
  for (const auto& rec : run_ensemble(p, {}, 1)) {
    for (const auto& e : rec.events) {
      CHECK_FALSE(e.detected);
      CHECK_FALSE(e.corrected);
      ++jumps;
    }
  }
  CHECK(jumps > 0);
}

TEST_CASE("emission rate of the corrected code is gamma") {
  // Each codeword loses norm as exp(-gamma t), and corrections return to the code.
  ProtocolParams p;
  p.n_traj = 1000;
  p.t_final = 2.0;
  double total = 0.0;
  for (const auto& rec : run_ensemble(p, {}, 0)) total += rec.events.size();
  const double expected = p.gamma * p.t_final * p.n_traj;
  CHECK(std::abs(total - expected) < 4 * std::sqrt(expected));
}

TEST_CASE("a corrected jump leaves only a small error in either pulse half") {
  for (Mode mode : {Mode::kContinuousDrive, Mode::kPulsedEcho}) {
    for (double frac : {0.1, 0.4, 0.6, 0.9}) {
      ProtocolParams p;
      p.mode = mode;
      CHECK(corrected_jump_infidelity(p, 5, frac, 5) < 1e-6);
    }
  }
}

TEST_CASE("pulse frame after a jump") {
  ProtocolParams p = quiet(Mode::kPulsedEcho);
  const CycleEngine engine(protocol_schedule(p), p.damping());
  const Matrix x = embed(sigma_x(), kSensing, kCodeDims).matrix();
  CHECK(max_abs(engine.frame_after(0.25 * p.dt) - x * x) < 1e-15);
  CHECK(max_abs(engine.frame_after(0.75 * p.dt) - x) < 1e-15);
  const CycleEngine drive(protocol_schedule(quiet(Mode::kContinuousDrive)), p.damping());
  CHECK(max_abs(drive.frame_after(0.5 * p.dt) - Matrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("ensembles do not depend on the thread count") {
  ProtocolParams p = quiet(Mode::kPulsedEcho);
  p.eta = 0.8;
  p.n_traj = 50;
  TrajectoryOptions o;
  o.snapshot_cycles = strided_cycles(p.cycles(), 20);
  const auto a = run_ensemble(p, o, 1);
  const auto b = run_ensemble(p, o, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].final_state.amps() == b[i].final_state.amps());
    CHECK(a[i].snapshots.size() == o.snapshot_cycles.size());
  }
}

TEST_CASE("strided snapshot cycles") {
  CHECK(strided_cycles(10, 3) == std::vector<int>{3, 6, 9, 10});
  CHECK(strided_cycles(9, 3) == std::vector<int>{3, 6, 9});
  CHECK(strided_cycles(2000, 10).size() == 200);
  CHECK_THROWS_AS(strided_cycles(10, 0), std::invalid_argument);
}

TEST_CASE("parameter validation names the field") {
  ProtocolParams p;
  p.dt = 0.3;
  try {
    p.validate();
    FAIL("expected a ParamError");
  } catch (const ParamError& e) {
    CHECK(e.field() == "dt");
  }
  p = ProtocolParams{};
  p.eta = 1.2;
  CHECK_THROWS_AS(p.validate(), ParamError);
  p = ProtocolParams{};
  p.t_final = 0.0025;
  CHECK_THROWS_AS(p.validate(), ParamError);
}
