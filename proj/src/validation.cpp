#include "ecsense/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "ecsense/ensemble.hpp"
#include "ecsense/estimate.hpp"
#include "ecsense/noise.hpp"
#include "ecsense/oracle.hpp"
#include "ecsense/protocol.hpp"
#include "ecsense/rng.hpp"

namespace ecsense::validation {

namespace {

using protocol::CodeWords;
using protocol::Mode;
using protocol::ProtocolParams;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

StateVector random_state(Stream& stream, std::vector<int> dims) {
  const int d = total_dimension(dims);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(stream.uniform() - 0.5, stream.uniform() - 0.5);
  return StateVector(std::move(dims), v / v.norm());
}

// ---------------------------------------------------------------------------
// Shared experiment pieces (used at two ensemble sizes).

Outcome damping_composition() {
  const double s = std::numbers::sqrt2 / 2.0;
  const double pairs[][2] = {{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}, {s, s}};
  const double t = 1.0;
  const int substeps = 100;
  double amp_err = 0.0;
  double weight_err = 0.0;
  for (double gamma : {0.5, 1.0}) {
    const noise::DampingModel model{gamma, 0, {2}};
    const Operator step =
        propagator(noise::effective_hamiltonian(Operator::zero(2), model), t / substeps);
    for (const auto& ab : pairs) {
      StateVector psi = StateVector::qubit(ab[0], ab[1]);
      double lost = 0.0;
      for (int k = 0; k < substeps; ++k) {
        auto r = noise::step_no_jump(psi, step);
        lost += r.p_jump;
        psi = std::move(r.psi);
      }
      const auto exact = oracle::analytic_damping(ab[0], ab[1], gamma, t);
      amp_err = std::max(amp_err, (psi.amps() - exact.no_jump_branch.amps()).cwiseAbs().maxCoeff());
      weight_err = std::max(weight_err, std::abs(lost - exact.branch_weight));
    }
  }
  return {amp_err <= 1e-10 && weight_err <= 1e-10,
          "max amplitude error " + num(amp_err) + ", max jump-probability error " + num(weight_err)};
}

Outcome compensation_stationarity() {
  const double gamma = 1.0;
  const double dt = 1e-3;
  const int cycles = 100;
  const double alpha = 0.6, beta = 0.8;
  double dir_err = 0.0;
  double norm_err = 0.0;
  for (Mode mode : {Mode::kContinuousDrive, Mode::kPulsedEcho}) {
    const double rate = mode == Mode::kContinuousDrive ? gamma * beta * beta : gamma / 2.0;
    for (const auto& p : protocol::single_qubit_decay(alpha, beta, gamma, dt, cycles, mode)) {
      dir_err = std::max(dir_err, p.direction_error);
      norm_err = std::max(norm_err, std::abs(p.norm - std::exp(-rate * p.time)));
    }
    ProtocolParams params;
    params.gamma = gamma;
    params.g = 0.0;
    params.dt = dt;
    params.mode = mode;
    for (double phi : {0.0, 0.7}) {
      params.phi = phi;
      for (bool one : {false, true}) {
        for (const auto& p : protocol::codeword_decay(params, cycles, one)) {
          dir_err = std::max(dir_err, p.direction_error);
          norm_err = std::max(norm_err, std::abs(p.norm - std::exp(-gamma * p.time / 2.0)));
        }
      }
    }
  }
  return {dir_err <= 1e-6 && norm_err <= 1e-6,
          "max direction error " + num(dir_err) + ", max norm deviation " + num(norm_err)};
}

Outcome unfolding_equivalence(int n_traj, double tolerance, int threads) {
  double worst = 0.0;
  std::string where;
  std::uint64_t config = 0;
  for (double gamma : {0.5, 1.0}) {
    for (double g : {0.0, 0.3}) {
      for (Mode mode : {Mode::kContinuousDrive, Mode::kPulsedEcho}) {
        ProtocolParams p;
        p.gamma = gamma;
        p.g = g;
        p.mode = mode;
        p.dt = 1e-3;
        p.t_final = 2.0 / gamma;
        p.n_traj = n_traj;
        p.corrections = false;
        p.master_seed = derive_seed(1234, config++);
        const int n_cycles = p.cycles();
        std::vector<int> sample_cycles;
        for (int k = 1; k <= 5; ++k) sample_cycles.push_back(n_cycles * k / 5);

        protocol::TrajectoryOptions options;
        options.snapshot_cycles = sample_cycles;
        const auto records = protocol::run_ensemble(p, options, threads);

        const auto model = oracle::protocol_lindblad_model(p);
        auto rho = oracle::DensityMatrix::pure(protocol::logical_plus(CodeWords(p.phi)));
        int done = 0;
        for (int c : sample_cycles) {
          for (; done < c; ++done) rho = oracle::lindblad_evolve(rho, model, p.dt, 10);
          const auto avg = oracle::trajectory_average(records, c * p.dt);
          const double d = oracle::trace_distance(avg, rho);
          if (d > worst) {
            worst = d;
            where = "gamma=" + num(gamma) + " g=" + num(g) + " " + protocol::to_string(mode) +
                    " t=" + num(c * p.dt);
          }
        }
      }
    }
  }
  return {worst <= tolerance,
          "max trace distance " + num(worst) + " (" + where + "), bound " + num(tolerance)};
}

// Per-event infidelity for one forced, corrected jump; checks the bound for
// every mode and offset, and the dt-halving ratio.
Outcome recovery_correctness(bool require_halving) {
  ProtocolParams base;
  base.gamma = 1.0;
  base.g = 0.3;
  const double c_max = 10.0;
  double worst_c = 0.0;
  double worst_ratio_dev = 0.0;
  double leak = 0.0;
  std::ostringstream ratios;
  for (Mode mode : {Mode::kContinuousDrive, Mode::kPulsedEcho}) {
    for (double frac : {0.25, 0.5, 0.75}) {
      double prev = 0.0;
      for (double dt : {1e-3, 5e-4}) {
        ProtocolParams p = base;
        p.mode = mode;
        p.dt = dt;
        const double e = protocol::corrected_jump_infidelity(p, 10, frac, 10);
        worst_c = std::max(worst_c, e / ((p.gamma + p.g) * dt));
        if (prev > 0.0) {
          const double ratio = e / prev;
          worst_ratio_dev = std::max(worst_ratio_dev, std::abs(ratio - 0.5) / 0.5);
          if (frac == 0.5) ratios << protocol::to_string(mode) << " " << num(ratio) << " ";
        }
        prev = e;

        // Code-space weight right after the correcting cycle.
        p.t_final = 11 * dt;
        protocol::TrajectoryOptions o;
        o.suppress_random_jumps = true;
        o.forced_jump = protocol::ForcedJump{10, frac, true};
        Stream s(p.master_seed, 0);
        const auto rec = protocol::run_trajectory(p, s, o);
        const CodeWords code(p.phi);
        const double in_code = std::norm(inner(code.zero(), rec.final_state)) +
                               std::norm(inner(code.one(), rec.final_state));
        leak = std::max(leak, 1.0 - in_code);
      }
    }
  }
  const bool bound_ok = worst_c <= c_max && leak <= 1e-10;
  const bool halving_ok = worst_ratio_dev <= 0.2;
  std::string detail = "max C = " + num(worst_c) + " (bound " + num(c_max) +
                       "), code-space leakage " + num(leak);
  if (require_halving) {
    detail += ", halving ratios at mid-cycle: " + ratios.str() + "(need 0.5 +- 20%, worst dev " +
              num(worst_ratio_dev) + ")";
  }
  return {bound_ok && (!require_halving || halving_ok), detail};
}

Outcome sigma_z_averaging() {
  const double g = 0.3, gamma = 1.0, dt = 1e-3, t = 1.0;
  const double z = estimate::sigma_z_failure_demo(g, gamma, dt, t);
  const double x = estimate::sigma_x_contrast_phase(g, gamma, dt, t);
  const double z0 = estimate::sigma_z_failure_demo(g, 0.0, 1e-2, t);
  const double x0 = estimate::sigma_x_contrast_phase(g, 0.0, 1e-2, t);
  const bool pass = std::abs(z) <= 2 * g * dt && std::abs(z0) <= 2 * g * 1e-2 &&
                    std::abs(x - 2 * g * t) <= 1e-6 && std::abs(x0 - 2 * g * t) <= 1e-6;
  return {pass, "sigma_z phase " + num(z) + " (bound " + num(2 * g * dt) + "), sigma_x phase " +
                    num(x) + " (expect " + num(2 * g * t) + ")"};
}

// ---------------------------------------------------------------------------
// Validation-only checks.

Outcome propagator_vs_eigen() {
  Stream stream(7, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3 * 2;
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = Complex(stream.uniform() - 0.5, stream.uniform() - 0.5);
    const Matrix h = (a + a.adjoint()) * 2.0;
    const double t = 0.1 + 3.0 * stream.uniform();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Matrix phase = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) phase(i, i) = std::exp(Complex(0.0, -t * es.eigenvalues()(i)));
    const Matrix ref = es.eigenvectors() * phase * es.eigenvectors().adjoint();
    const Matrix got = propagator(Operator::hermitian(h), t).matrix();
    worst = std::max(worst, max_abs(got - ref));
  }
  return {worst <= 1e-12, "max deviation from eigendecomposition " + num(worst)};
}

Outcome echo_identity() {
  Stream stream(11, 0);
  double worst = 0.0;
  for (double phi : {0.0, 0.4, 2.0}) {
    ProtocolParams p;
    p.gamma = 0.0;
    p.phi = phi;
    p.dt = 0.05;
    p.mode = Mode::kPulsedEcho;
    const protocol::CycleEngine engine(protocol::protocol_schedule(p), p.damping());
    const Operator ref = propagator(protocol::signal_hamiltonian(p.g, phi), p.dt);
    for (int k = 0; k < 5; ++k) {
      const StateVector psi = random_state(stream, protocol::kCodeDims);
      Vector out = psi.amps();
      engine.evolve_no_jump(out);
      worst = std::max(worst,
                       1.0 - fidelity(apply(ref, psi), StateVector(protocol::kCodeDims, out)));
    }
  }
  return {worst <= 1e-10, "max fidelity deviation " + num(worst)};
}

Outcome codewords_stationary() {
  double worst = 0.0;
  for (double phi : {0.0, 1.1}) {
    ProtocolParams p;
    p.phi = phi;
    const CodeWords code(phi);
    const Operator h = protocol::signal_hamiltonian(p.g, phi) +
                       protocol::compensation_hamiltonian_encoded(p.gamma, phi);
    const Operator h_eff = noise::effective_hamiltonian(h, p.damping());
    const Complex half_decay(0.0, -p.gamma / 2.0);
    worst = std::max(worst, (h_eff.matrix() * code.zero().amps() -
                             (p.g + half_decay) * code.zero().amps()).norm());
    worst = std::max(worst, (h_eff.matrix() * code.one().amps() -
                             (-p.g + half_decay) * code.one().amps()).norm());
  }
  return {worst <= 1e-12, "max eigen-residual of the codewords " + num(worst)};
}

Outcome recovery_map() {
  double worst = 0.0;
  for (double phi : {0.0, 0.9}) {
    const CodeWords code(phi);
    const Operator v = protocol::recovery_unitary(code);
    worst = std::max(worst, max_abs(v.matrix() * v.matrix().adjoint() - Matrix::Identity(4, 4)));
    const auto z = apply(v, StateVector::basis(protocol::kCodeDims, 0));
    const auto o = apply(v, StateVector::basis(protocol::kCodeDims, 1));
    worst = std::max(worst, (z.amps() - code.zero().amps()).norm());
    worst = std::max(worst, (o.amps() + code.one().amps()).norm());
    // A detected jump from any code state is undone exactly.
    const StateVector psi = protocol::encode(0.6, Complex(0.0, 0.8), code);
    const noise::DampingModel damping{1.0, protocol::kSensing, protocol::kCodeDims};
    const auto fixed = apply(v, noise::apply_jump(psi, damping));
    worst = std::max(worst, 1.0 - fidelity(psi, fixed));
  }
  return {worst <= 1e-12, "max deviation " + num(worst)};
}

Outcome lindblad_physical() {
  ProtocolParams p;
  p.g = 0.3;
  p.corrections = false;
  double worst_trace = 0.0;
  double worst_eig = 0.0;
  for (Mode mode : {Mode::kContinuousDrive, Mode::kPulsedEcho}) {
    p.mode = mode;
    const auto model = oracle::protocol_lindblad_model(p);
    auto rho = oracle::DensityMatrix::pure(protocol::logical_plus(CodeWords(p.phi)));
    for (int c = 0; c < 500; ++c) {
      rho = oracle::lindblad_evolve(rho, model, p.dt, 10);
      worst_trace = std::max(worst_trace, std::abs(rho.trace() - 1.0));
      if (c % 50 == 49) worst_eig = std::min(worst_eig, rho.min_eigenvalue());
    }
  }
  return {worst_trace <= 1e-9 && worst_eig >= -1e-8,
          "max trace drift " + num(worst_trace) + ", min eigenvalue " + num(worst_eig)};
}

Outcome thread_independence(int threads) {
  ProtocolParams p;
  p.n_traj = 64;
  p.t_final = 0.5;
  p.eta = 0.9;
  protocol::TrajectoryOptions o;
  o.snapshot_cycles = protocol::strided_cycles(p.cycles(), 50);
  const auto a = protocol::run_ensemble(p, o, 1);
  const auto b = protocol::run_ensemble(p, o, std::max(4, resolve_threads(threads)));
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    same = a[i].final_state.amps() == b[i].final_state.amps() &&
           a[i].events.size() == b[i].events.size();
  }
  return {same, same ? "ensembles bitwise identical" : "ensembles differ"};
}

Check make(std::string id, std::string description, std::function<Outcome(int)> body) {
  return {id, description, [id, description, body](int threads) {
            const auto start = std::chrono::steady_clock::now();
            const Outcome o = body(threads);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return CheckResult{id, description, o.pass, o.detail, secs};
          }};
}

// Wraps a check with a wall-clock budget.
std::function<Outcome(int)> within(double seconds, std::function<Outcome(int)> body) {
  return [seconds, body](int threads) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = body(threads);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > seconds) {
      o.pass = false;
      o.detail += ", over the " + num(seconds) + " s budget";
    }
    return o;
  };
}

// ---------------------------------------------------------------------------
// Acceptance experiments.

Outcome corrected_sensing(int threads) {
  ProtocolParams p;
  p.eta = 1.0;
  p.gamma = 1.0;
  p.g = 0.3;
  p.dt = 1e-3;
  p.t_final = 2.0;
  p.n_traj = 4000;
  p.mode = Mode::kContinuousDrive;
  const CodeWords code(p.phi);
  const StateVector ideal = protocol::ideal_state(code, p.g, p.t_final);
  struct Final {
    double fidelity;
    Complex coherence;
  };
  const auto finals = parallel_map<Final>(static_cast<std::size_t>(p.n_traj), threads,
                                          [&](std::size_t i) {
                                            Stream s(p.master_seed, i);
                                            const auto r = protocol::run_trajectory(p, s);
                                            return Final{fidelity(ideal, r.final_state),
                                                         estimate::logical_coherence(
                                                             r.final_state, code)};
                                          });
  double f = 0.0;
  Complex coh = 0.0;
  for (const auto& x : finals) {
    f += x.fidelity;
    coh += x.coherence;
  }
  f /= p.n_traj;
  const double phase = std::arg(coh);
  const double target = 2.0 * p.g * p.t_final;
  return {f >= 0.99 && std::abs(phase - target) <= 5e-2,
          "mean fidelity " + std::to_string(f) + " (need >= 0.99), phase " + std::to_string(phase) + " vs 2gT = " +
              num(target)};
}

Outcome dt_scaling(int threads) {
  ProtocolParams p;
  p.n_traj = 4000;
  p.eta = 1.0;
  const double dts[] = {4e-3, 2e-3, 1e-3, 5e-4};
  const auto r = estimate::dt_scaling_sweep(p, dts, threads);
  std::vector<double> amp;
  for (double y : r.y_values) amp.push_back(std::sqrt(y));
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < amp.size(); ++k) {
    lx.push_back(std::log(r.x_values[k]));
    ly.push_back(std::log(amp[k]));
  }
  const double amp_slope = estimate::fit_line(lx, ly).slope;
  const bool slope_ok = std::abs(r.fit_slope - 1.0) <= 0.15;
  const bool intercept_ok =
      std::abs(r.linear_intercept) <= 2.0 * r.linear_intercept_stderr;
  std::ostringstream d;
  d << "infidelity slope " << num(r.fit_slope) << " (need 1 +- 0.15), linear intercept "
    << num(r.linear_intercept) << " +- " << num(r.linear_intercept_stderr)
    << "; sqrt(infidelity) slope " << num(amp_slope) << "; infidelity";
  for (double y : r.y_values) d << " " << num(y);
  return {slope_ok && intercept_ok, d.str()};
}

Outcome coherence_extension(int threads) {
  ProtocolParams p;
  p.n_traj = 2000;
  p.dt = 1e-3;
  p.t_final = 150.0;
  const double etas[] = {0.0, 0.9, 0.99};
  const auto r = estimate::eta_coherence_sweep(p, etas, threads);
  const double r99 = r.y_values[2] / r.y_values[0];
  const double r90 = r.y_values[1] / r.y_values[0];
  const bool censored = r.censored[0] || r.censored[1] || r.censored[2];
  return {!censored && r99 >= 30 && r99 <= 300 && r90 >= 4 && r90 <= 25,
          "T_eff " + num(r.y_values[0]) + ", " + num(r.y_values[1]) + ", " + num(r.y_values[2]) +
              "; ratio(0.99) " + num(r99) + " in [30, 300], ratio(0.9) " + num(r90) +
              " in [4, 25]" + (censored ? ", censored point" : "")};
}

}  // namespace

std::vector<Check> validation_checks() {
  return {
      make("V1", "propagator matches Hermitian eigendecomposition",
           [](int) { return propagator_vs_eigen(); }),
      make("V2", "composed no-jump steps match closed-form damping",
           [](int) { return damping_composition(); }),
      make("V3", "compensation keeps directions stationary",
           [](int) { return compensation_stationarity(); }),
      make("V4", "codewords are eigenvectors of the compensated H_eff",
           [](int) { return codewords_stationary(); }),
      make("V5", "echo cycle equals the signal propagator without damping",
           [](int) { return echo_identity(); }),
      make("V6", "recovery unitary maps and undoes a detected jump",
           [](int) { return recovery_map(); }),
      make("V7", "master equation keeps trace and positivity",
           [](int) { return lindblad_physical(); }),
      make("V8", "trajectory average matches master equation (n=2000, 3-sigma bound)",
           [](int threads) { return unfolding_equivalence(2000, 0.045, threads); }),
      make("V9", "forced-jump correction bounded by C (gamma+g) dt, C <= 10",
           [](int) { return recovery_correctness(false); }),
      make("V10", "sigma_z signal averaged away by the echo",
           [](int) { return sigma_z_averaging(); }),
      make("V11", "ensemble independent of thread count", thread_independence),
  };
}

std::vector<Check> acceptance_checks() {
  return {
      make("A1", "no-jump composition exact", within(1.0, [](int) { return damping_composition(); })),
      make("A2", "compensation stationarity",
           within(1.0, [](int) { return compensation_stationarity(); })),
      make("A3", "error-corrected sensing", within(120.0, corrected_sensing)),
      make("A4", "infidelity scales linearly in dt", within(600.0, dt_scaling)),
      make("A5", "coherence extension with detection", within(900.0, coherence_extension)),
      make("A6", "unfolding equivalence (n=10^4)",
           within(300.0, [](int threads) { return unfolding_equivalence(10000, 0.02, threads); })),
      make("A7", "recovery correctness", [](int) { return recovery_correctness(true); }),
      make("A8", "sigma_z signal averaged by pulses", [](int) { return sigma_z_averaging(); }),
  };
}

std::vector<CheckResult> run_checks(const std::vector<Check>& checks, int threads,
                                    const std::function<void(const CheckResult&)>& report) {
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    CheckResult r;
    try {
      r = c.run(threads);
    } catch (const std::exception& e) {
      r = CheckResult{c.id, c.description, false, std::string("exception: ") + e.what(), 0.0};
    }
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CheckResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  return r.id + (r.pass ? " PASS " : " FAIL ") + r.description + ": " + r.detail + " (" + secs +
         "s)";
}

}  // namespace ecsense::validation
