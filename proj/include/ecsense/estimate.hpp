#pragma once

// Metrology on top of the trajectory simulator: Ramsey readout and frequency
// fits, error scaling with the cycle length, coherence versus detection
// efficiency, and the sigma_z echo-cancellation demonstration.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecsense/hilbert.hpp"
#include "ecsense/protocol.hpp"

namespace ecsense::estimate {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// <psi|X_L|psi> with X_L = |0_L><1_L| + |1_L><0_L|.
double logical_x_expectation(const StateVector& psi, const protocol::CodeWords& code);

/// 2 <psi|0_L><1_L|psi>. Its real part is <X_L>, its modulus the fringe
/// envelope (one for a pure code state with balanced weights).
Complex logical_coherence(const StateVector& psi, const protocol::CodeWords& code);

/// arg(<1_L|psi> / <0_L|psi>) in (-pi, pi]; equals 2gt on the noise-free
/// trajectory.
double logical_phase(const StateVector& psi, const protocol::CodeWords& code);

/// 1 - |<ideal(t)|psi>|^2.
double logical_infidelity(const StateVector& psi, const protocol::CodeWords& code, double g,
                          double t);

struct CosineFit {
  double amplitude = 0.0;  // V0
  double g = 0.0;          // >= 0
  double rss = 0.0;
};

/// Least-squares fit of y = V0 cos(2 g t) with V0 and g free. g is profiled
/// over a grid up to the sampling Nyquist limit and then refined. Throws
/// EstimationError for fewer than two distinct nonzero times.
CosineFit fit_cosine(std::span<const double> t, std::span<const double> y);

struct RamseyResult {
  std::vector<double> t_points;
  std::vector<double> visibility;  // ensemble mean <X_L> per time
  double g_estimate = 0.0;
  double g_std = 0.0;  // half the central 68% bootstrap interval
  double amplitude = 0.0;
  int n_traj = 0;
};

inline constexpr int kBootstrapResamples = 200;

RamseyResult ramsey_experiment(const protocol::ProtocolParams& params,
                               std::span<const double> t_points, int threads = 0,
                               int resamples = kBootstrapResamples);

/// Shot-noise standard deviation of g from n binary readouts at time t with
/// fringe visibility V. Throws std::invalid_argument at a non-informative
/// operating point.
double crb_std(double visibility, double g, double t, int n);

struct SweepResult {
  std::vector<double> x_values;
  std::vector<double> y_values;
  std::vector<double> y_stderr;
  std::vector<bool> censored;
  double fit_slope = 0.0;      // log-log OLS
  double fit_intercept = 0.0;  // log-log OLS
  double linear_intercept = 0.0;  // weighted linear fit y = a + b x
  double linear_intercept_stderr = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
};

/// Ordinary least squares; with weights, weighted least squares where the
/// standard errors come from the weights (weights = 1/sigma^2).
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

/// Mean final logical infidelity against the ideal state for each dt, with
/// eta = 1. Point k uses master seed derive_seed(base.master_seed, k).
SweepResult dt_scaling_sweep(const protocol::ProtocolParams& base,
                             std::span<const double> dt_values, int threads = 0);

/// Effective coherence time per eta: first time the ensemble fringe envelope
/// |<2 <psi|0_L><1_L|psi>>| drops to 1/e, interpolated linearly between
/// recorded cycles. Never crossing within base.t_final gives a censored
/// entry equal to t_final.
SweepResult eta_coherence_sweep(const protocol::ProtocolParams& base,
                                std::span<const double> eta_values, int threads = 0);

/// Envelope time series used by eta_coherence_sweep, exposed for testing.
struct EnvelopeSeries {
  std::vector<double> time;
  std::vector<double> envelope;
};
EnvelopeSeries coherence_envelope(const protocol::ProtocolParams& params, int threads = 0);

/// First 1/e crossing of a decaying series (linear interpolation); nullopt if
/// it never crosses.
std::optional<double> first_crossing(std::span<const double> time,
                                     std::span<const double> value, double level);

struct PhasePoint {
  double time;
  double phase;
};

/// Relative phase of (|00> + |11>)/sqrt2 under g sigma_z (x) I with pi-pulses
/// at dt/2 and dt and no-jump damping, recorded after every `stride` cycles.
std::vector<PhasePoint> sigma_z_phase_series(double g, double gamma, double dt, double t_total,
                                             int stride = 1);

/// Accumulated relative phase after t_total of the sigma_z echo run.
double sigma_z_failure_demo(double g, double gamma, double dt, double t_total);

/// Contrast run: g sigma_x (x) I on the phi = 0 code with the same pulses;
/// returns the accumulated logical phase (2 g t_total when gamma = 0).
double sigma_x_contrast_phase(double g, double gamma, double dt, double t_total);

}  // namespace ecsense::estimate
