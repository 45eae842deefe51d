#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ecsense/noise.hpp"
#include "ecsense/oracle.hpp"
#include "ecsense/protocol.hpp"

using namespace ecsense;
using noise::DampingModel;

TEST_CASE("model validation") {
  CHECK_THROWS_AS((DampingModel{-1.0, 0, {2}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DampingModel{1.0, 1, {2}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((noise::DetectionModel{1.5, 0}.validate()), std::invalid_argument);
}

TEST_CASE("effective Hamiltonian carries -i gamma on the excited level") {
  const DampingModel m{0.7, 1, {2, 2}};
  const Operator h = noise::effective_hamiltonian(Operator::zero(4), m);
  const Matrix expected =
      Complex(0.0, -0.7) * tensor_product(Operator::identity(2), qubit_projector(1)).matrix();
  CHECK(max_abs(h.matrix() - expected) < 1e-15);
  const Operator l = noise::jump_operator(m);
  // L^+ L / 2 is exactly the anti-Hermitian part.
  CHECK(max_abs(Complex(0.0, -0.5) * (l.adjoint() * l).matrix() - expected) < 1e-15);
}

TEST_CASE("half-life of the no-jump branch") {
  const double gamma = 1.0, t = std::log(2.0);
  const DampingModel m{gamma, 0, {2}};
  const auto step = noise::step_no_jump(StateVector::qubit(0.0, 1.0),
                                        noise::effective_hamiltonian(Operator::zero(2), m), t);
  CHECK(std::abs(step.psi[1] - 0.5) < 1e-14);
  CHECK(step.p_jump == doctest::Approx(0.75).epsilon(1e-14));
  const auto ground = noise::step_no_jump(StateVector::qubit(1.0, 0.0),
                                          noise::effective_hamiltonian(Operator::zero(2), m), t);
  CHECK(ground.p_jump == 0.0);
}

TEST_CASE("composed steps reproduce the closed form for random states") {
  Stream s(99, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const double theta = std::numbers::pi * s.uniform();
    const Complex alpha = std::cos(theta / 2);
    const Complex beta = std::polar(std::sin(theta / 2), 2 * std::numbers::pi * s.uniform());
    const double gamma = 0.1 + 2.0 * s.uniform();
    const double t = 0.2 + 2.0 * s.uniform();
    const DampingModel m{gamma, 0, {2}};
    const Operator step = propagator(noise::effective_hamiltonian(Operator::zero(2), m), t / 100);
    StateVector psi = StateVector::qubit(alpha, beta);
    double lost = 0.0;
    for (int k = 0; k < 100; ++k) {
      auto r = noise::step_no_jump(psi, step);
      lost += r.p_jump;
      psi = std::move(r.psi);
    }
    const auto exact = oracle::analytic_damping(alpha, beta, gamma, t);
    CHECK((psi.amps() - exact.no_jump_branch.amps()).norm() < 1e-12);
    CHECK(std::abs(lost - exact.branch_weight) < 1e-12);
  }
}

TEST_CASE("jumps lower the target qubit") {
  const DampingModel m{1.0, 0, {2, 2}};
  const StateVector psi = StateVector::basis({2, 2}, 3);  // |11>
  const StateVector out = noise::apply_jump(psi, m);
  CHECK(std::abs(out[1] - 1.0) < 1e-15);  // |01>
  CHECK_THROWS_AS(noise::apply_jump(StateVector::basis({2, 2}, 1), m), std::logic_error);
}

TEST_CASE("detection draws") {
  Stream a(3, 0), b(3, 0);
  CHECK_FALSE(noise::sample_detection(false, {0.5, 0}, a));
  CHECK(a.next_u64() == b.next_u64());  // no draw without an event

  Stream s(3, 1);
  CHECK(noise::sample_detection(true, {1.0, 0}, s));
  CHECK_FALSE(noise::sample_detection(true, {0.0, 0}, s));

  const int n = 20000;
  const double eta = 0.7;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += noise::sample_detection(true, {eta, 0}, s);
  const double sigma = std::sqrt(n * eta * (1 - eta));
  CHECK(std::abs(hits - n * eta) < 4 * sigma);
}

TEST_CASE("resolved jump times follow the exponential law") {
  // One long stage, so jump times spread over the whole window.
  const double gamma = 1.0, window = 1.0;
  const CycleSchedule schedule{{window, Operator::zero(2), std::nullopt}};
  const protocol::CycleEngine engine(schedule, DampingModel{gamma, 0, {2}});
  Stream s(17, 0);
  std::vector<double> times;
  int trials = 0;
  while (times.size() < 4000) {
    Vector psi = StateVector::qubit(0.0, 1.0).amps();
    ++trials;
    if (auto t = engine.evolve_sampled(psi, s, protocol::JumpTiming::kResolved)) {
      times.push_back(*t);
      CHECK(std::abs(psi(0)) == doctest::Approx(1.0));
    }
  }
  const double p_window = 1.0 - std::exp(-2.0 * gamma * window);
  const double rate = static_cast<double>(times.size()) / trials;
  CHECK(std::abs(rate - p_window) < 4 * std::sqrt(p_window * (1 - p_window) / trials));

  std::sort(times.begin(), times.end());
  double ks = 0.0;
  const double n = static_cast<double>(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double cdf = (1.0 - std::exp(-2.0 * gamma * times[i])) / p_window;
    ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(n));  // 1% level
}

TEST_CASE("cycle-end timing keeps the same jump decision") {
  const CycleSchedule schedule{{0.3, Operator::zero(2), std::nullopt}};
  const protocol::CycleEngine engine(schedule, DampingModel{1.0, 0, {2}});
  for (int i = 0; i < 200; ++i) {
    Stream a(5, i), b(5, i);
    Vector pa = StateVector::qubit(0.6, 0.8).amps();
    Vector pb = pa;
    const auto ja = engine.evolve_sampled(pa, a, protocol::JumpTiming::kResolved);
    const auto jb = engine.evolve_sampled(pb, b, protocol::JumpTiming::kCycleEnd);
    CHECK(ja.has_value() == jb.has_value());
    if (jb) CHECK(*jb == 0.3);
  }
}
