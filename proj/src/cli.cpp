#include "ecsense/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ecsense/ensemble.hpp"
#include "ecsense/estimate.hpp"
#include "ecsense/oracle.hpp"
#include "ecsense/validation.hpp"

namespace ecsense::cli {

namespace {

using protocol::ProtocolParams;

const std::vector<std::string> kSubcommands{"validate", "decay-demo", "sense",
                                            "sweep-dt", "sweep-eta",  "sigma-z-demo"};
constexpr double kDtGrid[] = {4e-3, 2e-3, 1e-3, 5e-4};
constexpr double kEtaGrid[] = {0.0, 0.9, 0.99};
constexpr int kMaxRows = 200;

std::string flag_for(const std::string& field) {
  static const std::map<std::string, std::string> flags{
      {"gamma", "--gamma"}, {"g", "--g"},         {"phi", "--phi"},
      {"dt", "--dt"},       {"t_final", "--t-final"}, {"eta", "--eta"},
      {"n_traj", "--trajectories"}};
  const auto it = flags.find(field);
  return it == flags.end() ? "--" + field : it->second;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      text_ << (first ? "" : ",") << h;
      first = false;
    }
    text_ << '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      text_ << (first ? "" : ",") << fmt(v);
      first = false;
    }
    text_ << '\n';
  }
  void comment(const std::string& line) { text_ << "# " << line << '\n'; }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

int stride_for(int n_cycles) { return (n_cycles + kMaxRows - 1) / kMaxRows; }

struct Summary {
  std::string csv;
  std::string line;
};

Summary run_sense(const ProtocolParams& p, int threads) {
  const protocol::CodeWords code(p.phi);
  const std::vector<int> cycles = protocol::strided_cycles(p.cycles(), stride_for(p.cycles()));
  // Per snapshot: <X_L>, fidelity, jumps, detected, Re and Im of the coherence.
  using Sums = std::vector<std::array<double, 6>>;
  constexpr std::size_t kBlock = 16;
  const auto n = static_cast<std::size_t>(p.n_traj);
  const auto partial =
      parallel_map<Sums>((n + kBlock - 1) / kBlock, threads, [&](std::size_t b) {
        Sums sums(cycles.size(), std::array<double, 6>{});
        for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
          std::size_t k = 0;
          protocol::TrajectoryOptions o;
          o.snapshot_cycles = cycles;
          o.sink = [&](const protocol::Snapshot& s) {
            const Complex c = estimate::logical_coherence(s.state, code);
            auto& acc = sums[k++];
            acc[0] += c.real();
            acc[1] += fidelity(protocol::ideal_state(code, p.g, s.time), s.state);
            acc[2] += s.jumps;
            acc[3] += s.detected;
            acc[4] += c.real();
            acc[5] += c.imag();
          };
          Stream stream(p.master_seed, i);
          protocol::run_trajectory(p, stream, o);
        }
        return sums;
      });
  Sums total(cycles.size(), std::array<double, 6>{});
  for (const auto& part : partial) {
    for (std::size_t k = 0; k < total.size(); ++k) {
      for (std::size_t j = 0; j < 6; ++j) total[k][j] += part[k][j];
    }
  }
  const double nd = static_cast<double>(n);
  Csv csv{"time", "mean_x_logical", "mean_fidelity", "n_jumps_mean", "n_detected_mean"};
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    csv.row({cycles[k] * p.dt, total[k][0] / nd, total[k][1] / nd, total[k][2] / nd,
             total[k][3] / nd});
  }
  const auto& last = total.back();
  const double visibility = std::hypot(last[4], last[5]) / nd;
  return {csv.str(), "sense: final visibility " + fmt_short(visibility) + ", mean fidelity " +
                         fmt_short(last[1] / nd) + ", phase " +
                         fmt_short(std::atan2(last[5], last[4])) + " (2gT = " +
                         fmt_short(2 * p.g * p.t_final) + ")"};
}

Summary run_sweep_dt(const ProtocolParams& p, int threads) {
  const auto r = estimate::dt_scaling_sweep(p, kDtGrid, threads);
  Csv csv{"dt", "mean_infidelity", "stderr_infidelity"};
  for (std::size_t k = 0; k < r.x_values.size(); ++k) {
    csv.row({r.x_values[k], r.y_values[k], r.y_stderr[k]});
  }
  csv.comment("slope=" + fmt(r.fit_slope) + ", intercept=" + fmt(r.linear_intercept));
  return {csv.str(), "sweep-dt: log-log slope " + fmt_short(r.fit_slope) +
                         ", dt->0 intercept " + fmt_short(r.linear_intercept) + " +- " +
                         fmt_short(r.linear_intercept_stderr)};
}

Summary run_sweep_eta(const ProtocolParams& p, int threads) {
  const auto r = estimate::eta_coherence_sweep(p, kEtaGrid, threads);
  Csv csv{"eta", "t_eff", "censored"};
  for (std::size_t k = 0; k < r.x_values.size(); ++k) {
    csv.row({r.x_values[k], r.y_values[k], r.censored[k] ? 1.0 : 0.0});
  }
  std::string line = "sweep-eta: T_eff";
  for (std::size_t k = 0; k < r.x_values.size(); ++k) {
    line += " " + fmt_short(r.y_values[k]) + (r.censored[k] ? "(censored)" : "");
  }
  line += ", T_eff(0.99)/T_eff(0) = " + fmt_short(r.y_values.back() / r.y_values.front());
  return {csv.str(), line};
}

Summary run_decay_demo(const ProtocolParams& p) {
  const double alpha = 0.6, beta = 0.8;
  const auto series =
      protocol::single_qubit_decay(alpha, beta, p.gamma, p.dt, p.cycles(), p.mode);
  const int stride = stride_for(p.cycles());
  Csv csv{"time", "norm", "direction_error"};
  double worst = 0.0;
  for (std::size_t c = 0; c < series.size(); ++c) {
    worst = std::max(worst, series[c].direction_error);
    if (c == 0 || c % stride == 0 || c + 1 == series.size()) {
      csv.row({series[c].time, series[c].norm, series[c].direction_error});
    }
  }
  return {csv.str(), "decay-demo: final norm " + fmt_short(series.back().norm) +
                         ", max direction error " + fmt_short(worst)};
}

Summary run_sigma_z_demo(const ProtocolParams& p) {
  const auto series =
      estimate::sigma_z_phase_series(p.g, p.gamma, p.dt, p.t_final, stride_for(p.cycles()));
  Csv csv{"time", "accumulated_phase"};
  for (const auto& pt : series) csv.row({pt.time, pt.phase});
  const double contrast = estimate::sigma_x_contrast_phase(p.g, p.gamma, p.dt, p.t_final);
  return {csv.str(), "sigma-z-demo: |phase| " + fmt_short(std::abs(series.back().phase)) +
                         " (bound 2g*dt = " + fmt_short(2 * p.g * p.dt) +
                         "), sigma_x contrast phase " + fmt_short(contrast)};
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig config;
  ProtocolParams& p = config.params;
  std::string mode = "drive";
  std::string threads = "auto";

  CLI::App app{"Error-corrected sensing simulator", "ecsense"};
  app.add_option("subcommand", config.subcommand, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(kSubcommands));
  app.add_option("--gamma", p.gamma, "Amplitude decay rate")->capture_default_str();
  app.add_option("--g", p.g, "Signal strength")->capture_default_str();
  app.add_option("--phi", p.phi, "Signal axis angle")->capture_default_str();
  app.add_option("--dt", p.dt, "Error-correction cycle length")->capture_default_str();
  app.add_option("--t-final", p.t_final, "Total sensing time")->capture_default_str();
  app.add_option("--eta", p.eta, "Detection efficiency")->capture_default_str();
  app.add_option("--mode", mode, "Compensation: echo or drive")
      ->check(CLI::IsMember({"echo", "drive"}))
      ->capture_default_str();
  app.add_option("--trajectories", p.n_traj, "Ensemble size")->capture_default_str();
  app.add_option("--seed", p.master_seed, "Master seed")->capture_default_str();
  app.add_option("--out", config.output_path, "CSV output path");
  app.add_option("--threads", threads, "Worker threads: auto or a positive count")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    if (what.empty()) what = e.get_name();
    throw UsageError(what);
  }

  p.mode = mode == "echo" ? protocol::Mode::kPulsedEcho : protocol::Mode::kContinuousDrive;
  if (threads == "auto") {
    config.threads = 0;
  } else {
    std::size_t used = 0;
    int t = 0;
    try {
      t = std::stoi(threads, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != threads.size() || t < 1) {
      throw UsageError("--threads: expected 'auto' or a positive integer, got '" + threads + "'");
    }
    config.threads = t;
  }
  try {
    p.validate();
  } catch (const protocol::ParamError& e) {
    throw UsageError(flag_for(e.field()) + ": " + e.what());
  }
  if (config.subcommand == "sweep-dt" && p.eta != 1.0) {
    throw UsageError("--eta: sweep-dt runs with perfect detection (eta = 1)");
  }
  if (config.subcommand == "sweep-eta" && p.gamma * p.dt > 0.1 * (1.0 - kEtaGrid[2])) {
    throw UsageError("--dt: sweep-eta needs gamma*dt <= " + fmt(0.1 * (1.0 - kEtaGrid[2])) +
                     " to resolve eta = " + fmt(kEtaGrid[2]));
  }
  if (config.output_path.empty()) config.output_path = config.subcommand + ".csv";
  return config;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return fmt_short(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                         .count());
  };

  if (config.subcommand == "validate") {
    const auto results = validation::run_checks(
        validation::validation_checks(), config.threads,
        [&](const validation::CheckResult& r) { out << validation::format_result(r) << '\n'; });
    const auto passed = std::count_if(results.begin(), results.end(),
                                      [](const auto& r) { return r.pass; });
    out << "validate: " << passed << "/" << results.size() << " checks passed, runtime "
        << elapsed() << " s\n";
    return passed == static_cast<long>(results.size()) ? 0 : 1;
  }

  std::ofstream file(config.output_path, std::ios::binary | std::ios::trunc);
  if (!file) {
    err << "--out: cannot open '" << config.output_path << "' for writing\n";
    return 2;
  }

  Summary summary;
  try {
    const auto& p = config.params;
    if (config.subcommand == "sense") {
      summary = run_sense(p, config.threads);
    } else if (config.subcommand == "sweep-dt") {
      summary = run_sweep_dt(p, config.threads);
    } else if (config.subcommand == "sweep-eta") {
      summary = run_sweep_eta(p, config.threads);
    } else if (config.subcommand == "decay-demo") {
      summary = run_decay_demo(p);
    } else if (config.subcommand == "sigma-z-demo") {
      summary = run_sigma_z_demo(p);
    } else {
      err << "unknown subcommand '" << config.subcommand << "'\n";
      return 2;
    }
  } catch (const protocol::ParamError& e) {
    err << flag_for(e.field()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  }

  file << summary.csv;
  file.flush();
  if (!file) {
    err << "--out: failed writing '" << config.output_path << "'\n";
    return 1;
  }
  out << summary.line << ", runtime " << elapsed() << " s\n";
  return 0;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_args(args);
  } catch (const UsageError& e) {
    err << "ecsense: " << e.what() << '\n';
    return 2;
  }
  return run(config, out, err);
}

}  // namespace ecsense::cli
