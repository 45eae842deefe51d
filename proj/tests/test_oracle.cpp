#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "ecsense/oracle.hpp"

using namespace ecsense;
using namespace ecsense::oracle;

TEST_CASE("density matrix basics") {
  const auto rho = DensityMatrix::pure(StateVector::qubit(0.6, Complex(0.0, 0.8)));
  CHECK(rho.trace() == doctest::Approx(1.0));
  CHECK(rho.purity() == doctest::Approx(1.0));
  CHECK(rho.min_eigenvalue() > -1e-15);
  CHECK_NOTHROW(rho.validate());
  CHECK_THROWS_AS(DensityMatrix(2.0 * Matrix::Identity(2, 2)).validate(), NumericalError);
}

TEST_CASE("trace distance") {
  const auto a = DensityMatrix::pure(StateVector::qubit(1.0, 0.0));
  const auto b = DensityMatrix::pure(StateVector::qubit(0.0, 1.0));
  CHECK(trace_distance(a, b) == doctest::Approx(1.0));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
}

TEST_CASE("closed-form damping") {
  const auto none = analytic_damping(1.0, 0.0, 1.0, 3.0);
  CHECK(none.branch_weight == 0.0);
  const auto half = analytic_damping(0.0, 1.0, 1.0, std::log(2.0));
  CHECK(std::abs(half.no_jump_branch[1] - 0.5) < 1e-15);
  CHECK(half.branch_weight == doctest::Approx(0.75));
}

TEST_CASE("master equation reproduces single-qubit amplitude damping") {
  const double gamma = 0.7, dt = 1e-3;
  LindbladModel model{{{dt, Operator::zero(2), std::nullopt}},
                      {std::sqrt(2 * gamma) * sigma_minus()}};
  const double s = std::sqrt(0.5);
  auto rho = DensityMatrix::pure(StateVector::qubit(s, s));
  const int cycles = 1000;
  for (int c = 0; c < cycles; ++c) rho = lindblad_evolve(rho, model, dt, 4);
  const double t = cycles * dt;
  CHECK(std::abs(rho(1, 1).real() - 0.5 * std::exp(-2 * gamma * t)) < 1e-10);
  CHECK(std::abs(rho(0, 1) - 0.5 * std::exp(-gamma * t)) < 1e-10);
  CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
}

TEST_CASE("substeps must resolve the decay rate") {
  LindbladModel model{{{0.1, Operator::zero(2), std::nullopt}},
                      {std::sqrt(2.0) * sigma_minus()}};
  const auto rho = DensityMatrix::pure(StateVector::qubit(0.0, 1.0));
  CHECK_THROWS_AS(lindblad_evolve(rho, model, 0.1, 1), std::invalid_argument);
  CHECK_NOTHROW(lindblad_evolve(rho, model, 0.1, 10));
}

TEST_CASE("protocol model evolves physically") {
  protocol::ProtocolParams p;
  p.mode = protocol::Mode::kPulsedEcho;
  p.corrections = false;
  const auto model = protocol_lindblad_model(p);
  auto rho = DensityMatrix::pure(protocol::logical_plus(protocol::CodeWords(p.phi)));
  for (int c = 0; c < 300; ++c) {
    rho = lindblad_evolve(rho, model, p.dt, 10);
    CHECK(std::abs(rho.trace() - 1.0) <= 1e-9);
  }
  CHECK(rho.min_eigenvalue() >= -1e-8);
}

TEST_CASE("trajectory average checks its inputs") {
  protocol::ProtocolParams p;
  p.n_traj = 5;
  p.t_final = 0.01;
  p.gamma = 0.0;
  protocol::TrajectoryOptions o;
  o.snapshot_cycles = {5, 10};
  const auto recs = protocol::run_ensemble(p, o, 1);
  const auto rho = trajectory_average(recs, 0.005);
  CHECK(rho.purity() == doctest::Approx(1.0));  // identical pure states
  CHECK_THROWS_AS(trajectory_average(recs, 0.007), std::invalid_argument);

  auto mixed = recs;
  mixed[1].params.g = 0.1;
  CHECK_THROWS_AS(trajectory_average(mixed, 0.005), std::invalid_argument);
}

TEST_CASE("orthogonal states average to a mixture") {
  protocol::ProtocolParams p;
  p.t_final = p.dt;
  std::vector<protocol::TrajectoryRecord> recs;
  for (int i = 0; i < 2; ++i) {
    const auto psi = StateVector::basis(protocol::kCodeDims, i);
    recs.push_back({p, {}, {{1, p.dt, psi, 0, 0}}, psi});
  }
  const auto rho = trajectory_average(recs, p.dt);
  CHECK(rho.purity() == doctest::Approx(0.5));
}

TEST_CASE("unravelling matches the master equation without corrections") {
  for (auto mode : {protocol::Mode::kContinuousDrive, protocol::Mode::kPulsedEcho}) {
    protocol::ProtocolParams p;
    p.mode = mode;
    p.corrections = false;
    p.t_final = 1.0;
    p.n_traj = 2000;
    protocol::TrajectoryOptions o;
    o.snapshot_cycles = {500, 1000};
    const auto recs = protocol::run_ensemble(p, o, 0);
    const auto model = protocol_lindblad_model(p);
    auto rho = DensityMatrix::pure(protocol::logical_plus(protocol::CodeWords(p.phi)));
    for (int c = 1; c <= 1000; ++c) {
      rho = lindblad_evolve(rho, model, p.dt, 10);
      if (c % 500 == 0) {
        // 3-sigma Monte Carlo bound at n = 2000.
        CHECK(trace_distance(trajectory_average(recs, c * p.dt), rho) < 0.045);
      }
    }
  }
}
