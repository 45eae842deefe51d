#include "ecsense/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ecsense/ensemble.hpp"
#include "ecsense/rng.hpp"

namespace ecsense::estimate {

using protocol::CodeWords;
using protocol::ProtocolParams;

double logical_x_expectation(const StateVector& psi, const CodeWords& code) {
  return logical_coherence(psi, code).real();
}

Complex logical_coherence(const StateVector& psi, const CodeWords& code) {
  const Complex a0 = inner(code.zero(), psi);
  const Complex a1 = inner(code.one(), psi);
  return 2.0 * std::conj(a0) * a1 / psi.squared_norm();
}

double logical_phase(const StateVector& psi, const CodeWords& code) {
  return std::arg(inner(code.one(), psi) / inner(code.zero(), psi));
}

double logical_infidelity(const StateVector& psi, const CodeWords& code, double g, double t) {
  return 1.0 - fidelity(protocol::ideal_state(code, g, t), psi);
}

namespace {

// Residual sum of squares with V0 profiled out at fixed g.
struct Profile {
  double rss;
  double amplitude;
};

Profile profile(std::span<const double> t, std::span<const double> y, double g) {
  double yc = 0.0, cc = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double c = std::cos(2.0 * g * t[i]);
    yc += y[i] * c;
    cc += c * c;
    yy += y[i] * y[i];
  }
  if (cc <= 0.0) return {yy, 0.0};
  return {yy - yc * yc / cc, yc / cc};
}

}  // namespace

CosineFit fit_cosine(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw EstimationError("time and value counts differ");
  std::vector<double> distinct;
  for (double ti : t) {
    if (ti > 0.0) distinct.push_back(ti);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw EstimationError("need at least two distinct nonzero times");

  double min_gap = distinct.front();
  for (std::size_t i = 1; i < distinct.size(); ++i) {
    min_gap = std::min(min_gap, distinct[i] - distinct[i - 1]);
  }
  const double g_max = std::numbers::pi / (2.0 * min_gap);
  const double t_max = distinct.back();
  const auto grid = static_cast<std::size_t>(
      std::clamp(std::ceil(16.0 * g_max * t_max), 2000.0, 2.0e6));
  const double step = g_max / static_cast<double>(grid);

  std::size_t best = 0;
  double best_rss = profile(t, y, 0.0).rss;
  for (std::size_t k = 1; k <= grid; ++k) {
    const double rss = profile(t, y, k * step).rss;
    if (rss < best_rss) {
      best_rss = rss;
      best = k;
    }
  }

  // Golden-section refinement around the best grid point.
  double lo = std::max(0.0, (static_cast<double>(best) - 1.0) * step);
  double hi = (static_cast<double>(best) + 1.0) * step;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = profile(t, y, x1).rss;
  double f2 = profile(t, y, x2).rss;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = profile(t, y, x1).rss;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = profile(t, y, x2).rss;
    }
  }
  const double g = 0.5 * (lo + hi);
  const Profile p = profile(t, y, g);
  return {p.amplitude, g, p.rss};
}

namespace {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

int cycle_index(double t, double dt) {
  const double n = std::round(t / dt);
  if (t < 0.0 || std::abs(n * dt - t) > 1e-9 * std::max(1.0, t)) {
    throw std::invalid_argument("time point is not a multiple of dt");
  }
  return static_cast<int>(n);
}

}  // namespace

RamseyResult ramsey_experiment(const ProtocolParams& params, std::span<const double> t_points,
                               int threads, int resamples) {
  if (t_points.empty()) throw std::invalid_argument("no Ramsey time points");
  if (resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
  std::vector<int> point_cycles;
  for (double t : t_points) point_cycles.push_back(cycle_index(t, params.dt));
  std::vector<int> cycles;
  for (int c : point_cycles) {
    if (c > 0) cycles.push_back(c);
  }
  std::sort(cycles.begin(), cycles.end());
  cycles.erase(std::unique(cycles.begin(), cycles.end()), cycles.end());

  ProtocolParams p = params;
  p.t_final = cycles.empty() ? p.dt : cycles.back() * p.dt;
  p.validate();
  const CodeWords code(p.phi);
  const double x0 = logical_x_expectation(protocol::logical_plus(code), code);

  // readings[i][k]: <X_L> of trajectory i at t_points[k].
  const auto readings = parallel_map<std::vector<double>>(
      static_cast<std::size_t>(p.n_traj), threads, [&](std::size_t i) {
        std::vector<double> at_cycle(cycles.size());
        std::size_t next = 0;
        protocol::TrajectoryOptions options;
        options.snapshot_cycles = cycles;
        options.sink = [&](const protocol::Snapshot& s) {
          at_cycle[next++] = logical_x_expectation(s.state, code);
        };
        Stream stream(p.master_seed, i);
        protocol::run_trajectory(p, stream, options);
        std::vector<double> out;
        out.reserve(point_cycles.size());
        for (int c : point_cycles) {
          if (c == 0) {
            out.push_back(x0);
          } else {
            const auto pos = std::lower_bound(cycles.begin(), cycles.end(), c) - cycles.begin();
            out.push_back(at_cycle[static_cast<std::size_t>(pos)]);
          }
        }
        return out;
      });

  const std::size_t n = readings.size();
  const std::size_t m = t_points.size();
  auto means_of = [&](const std::vector<std::size_t>& pick) {
    std::vector<double> mean(m, 0.0);
    for (std::size_t idx : pick) {
      for (std::size_t k = 0; k < m; ++k) mean[k] += readings[idx][k];
    }
    for (double& v : mean) v /= static_cast<double>(pick.size());
    return mean;
  };

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  RamseyResult result;
  result.t_points.assign(t_points.begin(), t_points.end());
  result.visibility = means_of(all);
  result.n_traj = static_cast<int>(n);
  const CosineFit fit = fit_cosine(result.t_points, result.visibility);
  result.g_estimate = fit.g;
  result.amplitude = fit.amplitude;

  if (n > 1) {
    std::vector<double> boot;
    boot.reserve(static_cast<std::size_t>(resamples));
    Stream stream(derive_seed(p.master_seed, 0x6f6f7473ULL), 0);
    std::vector<std::size_t> pick(n);
    for (int b = 0; b < resamples; ++b) {
      for (auto& idx : pick) idx = static_cast<std::size_t>(stream.below(n));
      boot.push_back(fit_cosine(result.t_points, means_of(pick)).g);
    }
    result.g_std = 0.5 * (percentile(boot, 0.8413447460685429) -
                          percentile(boot, 0.15865525393145707));
  }
  return result;
}

double crb_std(double visibility, double g, double t, int n) {
  if (n < 1) throw std::invalid_argument("shot count must be >= 1");
  const double p = 0.5 * (1.0 + visibility * std::cos(2.0 * g * t));
  const double slope = -visibility * t * std::sin(2.0 * g * t);
  if (!(std::abs(slope) > 0.0)) {
    throw std::invalid_argument("non-informative operating point (zero fringe slope)");
  }
  return std::sqrt(p * (1.0 - p) / n) / std::abs(slope);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
  const std::size_t n = x.size();
  if (n != y.size() || (!weights.empty() && weights.size() != n)) {
    throw std::invalid_argument("fit_line: length mismatch");
  }
  if (n < 2) throw EstimationError("fit_line needs at least two points");
  const bool weighted = !weights.empty();
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighted ? weights[i] : 1.0;
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw EstimationError("fit_line: degenerate design");
  LineFit fit;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  double scale = 1.0;
  if (!weighted) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    scale = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
  }
  fit.slope_stderr = std::sqrt(scale * sw / det);
  fit.intercept_stderr = std::sqrt(scale * sxx / det);
  return fit;
}

namespace {

void fit_log_log(SweepResult& r, const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  if (lx.size() < 2 || lx.size() != xs.size()) {
    r.fit_slope = r.fit_intercept = std::nan("");
    return;
  }
  const LineFit f = fit_line(lx, ly);
  r.fit_slope = f.slope;
  r.fit_intercept = f.intercept;
}

}  // namespace

SweepResult dt_scaling_sweep(const ProtocolParams& base, std::span<const double> dt_values,
                             int threads) {
  if (base.eta != 1.0) throw std::invalid_argument("dt sweep requires eta = 1");
  if (dt_values.empty()) throw std::invalid_argument("empty dt grid");
  SweepResult r;
  const CodeWords code(base.phi);
  for (std::size_t k = 0; k < dt_values.size(); ++k) {
    ProtocolParams p = base;
    p.dt = dt_values[k];
    p.master_seed = derive_seed(base.master_seed, k);
    p.validate();
    const auto infid = parallel_map<double>(
        static_cast<std::size_t>(p.n_traj), threads, [&](std::size_t i) {
          Stream stream(p.master_seed, i);
          const auto rec = protocol::run_trajectory(p, stream);
          return logical_infidelity(rec.final_state, code, p.g, p.t_final);
        });
    const double n = static_cast<double>(infid.size());
    const double mean = std::accumulate(infid.begin(), infid.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : infid) ss += (v - mean) * (v - mean);
    const double sd = infid.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    r.x_values.push_back(p.dt);
    r.y_values.push_back(mean);
    r.y_stderr.push_back(sd / std::sqrt(n));
    r.censored.push_back(false);
  }
  fit_log_log(r, r.x_values, r.y_values);

  if (r.x_values.size() >= 2) {
    const bool all_positive_err =
        std::all_of(r.y_stderr.begin(), r.y_stderr.end(), [](double s) { return s > 0.0; });
    std::vector<double> w;
    if (all_positive_err) {
      for (double s : r.y_stderr) w.push_back(1.0 / (s * s));
    }
    const LineFit lin = fit_line(r.x_values, r.y_values, w);
    r.linear_intercept = lin.intercept;
    r.linear_intercept_stderr = lin.intercept_stderr;
  }
  return r;
}

namespace {

// Dense early (every cycle), then spaced at ~0.1% of elapsed time.
std::vector<int> envelope_cycles(int n_cycles) {
  std::vector<int> out;
  for (int c = 1; c < n_cycles; c += std::max(1, c / 1000)) out.push_back(c);
  out.push_back(n_cycles);
  return out;
}

}  // namespace

EnvelopeSeries coherence_envelope(const ProtocolParams& params, int threads) {
  params.validate();
  const CodeWords code(params.phi);
  const std::vector<int> cycles = envelope_cycles(params.cycles());
  constexpr std::size_t kBlock = 16;
  const auto n = static_cast<std::size_t>(params.n_traj);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;

  // Fixed trajectory blocks summed in block order: independent of threads.
  const auto partial = parallel_map<std::vector<Complex>>(blocks, threads, [&](std::size_t b) {
    std::vector<Complex> sum(cycles.size());
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      std::size_t next = 0;
      protocol::TrajectoryOptions options;
      options.snapshot_cycles = cycles;
      options.sink = [&](const protocol::Snapshot& s) {
        sum[next++] += logical_coherence(s.state, code);
      };
      Stream stream(params.master_seed, i);
      protocol::run_trajectory(params, stream, options);
    }
    return sum;
  });

  std::vector<Complex> total(cycles.size());
  for (const auto& part : partial) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += part[k];
  }
  EnvelopeSeries series;
  series.time.push_back(0.0);
  series.envelope.push_back(std::abs(logical_coherence(protocol::logical_plus(code), code)));
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    series.time.push_back(cycles[k] * params.dt);
    series.envelope.push_back(std::abs(total[k]) / static_cast<double>(n));
  }
  return series;
}

std::optional<double> first_crossing(std::span<const double> time, std::span<const double> value,
                                     double level) {
  if (time.size() != value.size()) throw std::invalid_argument("series length mismatch");
  for (std::size_t k = 0; k < value.size(); ++k) {
    if (value[k] > level) continue;
    if (k == 0) return time[0];
    const double frac = (value[k - 1] - level) / (value[k - 1] - value[k]);
    return time[k - 1] + frac * (time[k] - time[k - 1]);
  }
  return std::nullopt;
}

SweepResult eta_coherence_sweep(const ProtocolParams& base, std::span<const double> eta_values,
                                int threads) {
  if (eta_values.empty()) throw std::invalid_argument("empty eta grid");
  const double eta_max = *std::max_element(eta_values.begin(), eta_values.end());
  // Cycle-length error must stay well below the missed-detection error.
  if (base.gamma > 0.0 && base.gamma * base.dt > 0.1 * (1.0 - eta_max) + 1e-15) {
    throw std::invalid_argument("dt too coarse for the largest eta: need gamma*dt <= 0.1*(1-eta)");
  }
  SweepResult r;
  const double level = std::exp(-1.0);
  for (std::size_t k = 0; k < eta_values.size(); ++k) {
    ProtocolParams p = base;
    p.eta = eta_values[k];
    p.master_seed = derive_seed(base.master_seed, k);
    const EnvelopeSeries env = coherence_envelope(p, threads);
    const auto cross = first_crossing(env.time, env.envelope, level);
    r.x_values.push_back(p.eta);
    r.y_values.push_back(cross.value_or(p.t_final));
    r.y_stderr.push_back(0.0);
    r.censored.push_back(!cross.has_value());
  }
  std::vector<double> miss, teff;
  for (std::size_t k = 0; k < r.x_values.size(); ++k) {
    if (r.x_values[k] < 1.0 && !r.censored[k]) {
      miss.push_back(1.0 - r.x_values[k]);
      teff.push_back(r.y_values[k]);
    }
  }
  if (miss.size() >= 2) {
    fit_log_log(r, miss, teff);
  } else {
    r.fit_slope = r.fit_intercept = std::nan("");
  }
  return r;
}

namespace {

double wrap_phase(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

}  // namespace

std::vector<PhasePoint> sigma_z_phase_series(double g, double gamma, double dt, double t_total,
                                             int stride) {
  const int n_cycles = cycle_index(t_total, dt);
  if (n_cycles < 1) throw std::invalid_argument("t_total must be at least one cycle");
  const auto& dims = protocol::kCodeDims;
  const Operator h = embed(g * sigma_z(), protocol::kSensing, dims);
  const Operator flip = Operator::unitary(embed(sigma_x(), protocol::kSensing, dims).matrix());
  const CycleSchedule schedule{{dt / 2.0, h, flip}, {dt / 2.0, h, flip}};
  const protocol::CycleEngine engine(schedule, noise::DampingModel{gamma, protocol::kSensing, dims});

  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = std::numbers::sqrt2 / 2.0;
  double last = 0.0;
  double accumulated = 0.0;
  std::vector<PhasePoint> out;
  const std::vector<int> record = protocol::strided_cycles(n_cycles, std::max(1, stride));
  std::size_t next = 0;
  for (int c = 1; c <= n_cycles; ++c) {
    engine.evolve_no_jump(psi);
    psi.normalize();
    const double now = std::arg(psi(3) / psi(0));
    accumulated += wrap_phase(now - last);
    last = now;
    if (next < record.size() && record[next] == c) {
      out.push_back({c * dt, accumulated});
      ++next;
    }
  }
  return out;
}

double sigma_z_failure_demo(double g, double gamma, double dt, double t_total) {
  const auto cycles = cycle_index(t_total, dt);
  return sigma_z_phase_series(g, gamma, dt, t_total, std::max(1, cycles)).back().phase;
}

double sigma_x_contrast_phase(double g, double gamma, double dt, double t_total) {
  ProtocolParams p;
  p.gamma = gamma;
  p.g = g;
  p.phi = 0.0;
  p.dt = dt;
  p.t_final = t_total;
  p.mode = protocol::Mode::kPulsedEcho;
  p.validate();
  const CodeWords code(0.0);
  const protocol::CycleEngine engine(protocol::protocol_schedule(p), p.damping());
  Vector psi = protocol::logical_plus(code).amps();
  double last = 0.0;
  double accumulated = 0.0;
  for (int c = 0; c < p.cycles(); ++c) {
    engine.evolve_no_jump(psi);
    psi.normalize();
    const double now = logical_phase(StateVector(protocol::kCodeDims, psi), code);
    accumulated += wrap_phase(now - last);
    last = now;
  }
  return accumulated;
}

}  // namespace ecsense::estimate
