#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ecsense/cli.hpp"

using namespace ecsense;
using namespace ecsense::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ecsense_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("defaults and overrides") {
  const auto c = parse_args({"sense", "--g", "0.3", "--seed", "7"});
  CHECK(c.subcommand == "sense");
  CHECK(c.params.g == 0.3);
  CHECK(c.params.master_seed == 7);
  CHECK(c.params.gamma == 1.0);
  CHECK(c.params.dt == 1e-3);
  CHECK(c.params.t_final == 2.0);
  CHECK(c.params.eta == 1.0);
  CHECK(c.params.mode == protocol::Mode::kContinuousDrive);
  CHECK(c.params.n_traj == 1000);
  CHECK(c.threads == 0);
  CHECK(c.output_path == "sense.csv");

  const auto e = parse_args({"decay-demo", "--mode", "echo", "--dt", "5e-4", "--threads", "3"});
  CHECK(e.params.mode == protocol::Mode::kPulsedEcho);
  CHECK(e.params.dt == 5e-4);
  CHECK(e.threads == 3);
}

TEST_CASE("usage errors name the flag and exit 2") {
  const auto rate = invoke({"sense", "--dt", "0.3", "--gamma", "1"});
  CHECK(rate.code == 2);
  CHECK(rate.err.find("--dt") != std::string::npos);
  CHECK(std::count(rate.err.begin(), rate.err.end(), '\n') == 1);

  CHECK(invoke({"sense", "--nope", "1"}).code == 2);
  CHECK(invoke({"sense", "--g", "abc"}).err.find("--g") != std::string::npos);
  CHECK(invoke({"sense", "--mode", "sideways"}).code == 2);
  CHECK(invoke({"sense", "--threads", "0"}).err.find("--threads") != std::string::npos);
  CHECK(invoke({"sense", "--t-final", "0.0025"}).err.find("--t-final") != std::string::npos);
  CHECK(invoke({"sense", "--trajectories", "0"}).err.find("--trajectories") !=
        std::string::npos);
  CHECK(invoke({"sweep-dt", "--eta", "0.5"}).err.find("--eta") != std::string::npos);
  CHECK(invoke({"sweep-eta", "--dt", "0.01"}).err.find("--dt") != std::string::npos);
  CHECK(invoke({"launch"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"sense", "--out", "/nonexistent-dir/x.csv"}).code == 2);
}

TEST_CASE("sense writes one row per snapshot") {
  const auto path = scratch("sense.csv");
  const auto r = invoke({"sense", "--t-final", "0.5", "--trajectories", "40", "--out",
                         path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("visibility") != std::string::npos);
  CHECK(r.out.find("runtime") != std::string::npos);
  const auto rows = lines_of(slurp(path));
  CHECK(rows.front() == "time,mean_x_logical,mean_fidelity,n_jumps_mean,n_detected_mean");
  CHECK(rows.size() == 1 + 167);  // N = 500, stride ceil(500/200) = 3
  CHECK(rows.back().rfind("0.5,", 0) == 0);
}

TEST_CASE("sense CSV is independent of --threads") {
  std::string text[2];
  int k = 0;
  for (const char* threads : {"1", "3"}) {
    const auto path = scratch(std::string("det_") + threads + ".csv");
    REQUIRE(invoke({"sense", "--t-final", "0.3", "--eta", "0.7", "--trajectories", "70",
                    "--mode", "echo", "--threads", threads, "--out", path.string()})
                .code == 0);
    text[k++] = slurp(path);
  }
  CHECK(text[0] == text[1]);
}

TEST_CASE("sweep-dt uses the built-in grid and a trailing fit line") {
  const auto path = scratch("sweep_dt.csv");
  REQUIRE(invoke({"sweep-dt", "--trajectories", "50", "--t-final", "0.4", "--out",
                  path.string()})
              .code == 0);
  const auto rows = lines_of(slurp(path));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "dt,mean_infidelity,stderr_infidelity");
  CHECK(rows[1].rfind("0.004,", 0) == 0);
  CHECK(rows[4].rfind("0.0005,", 0) == 0);
  CHECK(rows[5].rfind("# slope=", 0) == 0);
  CHECK(rows[5].find(", intercept=") != std::string::npos);
}

TEST_CASE("sweep-eta, decay-demo and sigma-z-demo outputs") {
  const auto eta = scratch("sweep_eta.csv");
  REQUIRE(invoke({"sweep-eta", "--trajectories", "20", "--t-final", "0.5", "--out",
                  eta.string()})
              .code == 0);
  const auto eta_rows = lines_of(slurp(eta));
  REQUIRE(eta_rows.size() == 4);
  CHECK(eta_rows[0] == "eta,t_eff,censored");
  CHECK(eta_rows[3].rfind("0.99,0.5,1", 0) == 0);

  const auto decay = scratch("decay.csv");
  REQUIRE(invoke({"decay-demo", "--out", decay.string()}).code == 0);
  const auto decay_rows = lines_of(slurp(decay));
  CHECK(decay_rows[0] == "time,norm,direction_error");
  CHECK(decay_rows.size() == 1 + 1 + 200);  // t = 0 plus every 10th of 2000 cycles
  CHECK(decay_rows[1] == "0,1,0");

  const auto z = scratch("sigma_z.csv");
  const auto r = invoke({"sigma-z-demo", "--t-final", "1", "--out", z.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("bound 2g*dt") != std::string::npos);
  const auto z_rows = lines_of(slurp(z));
  CHECK(z_rows[0] == "time,accumulated_phase");
  CHECK(z_rows.size() == 1 + 200);
}
