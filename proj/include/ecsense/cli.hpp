#pragma once

// Command-line experiment runner.
//
//   ecsense <subcommand> [--gamma G] [--g G] [--phi P] [--dt DT] [--t-final T]
//           [--eta E] [--mode echo|drive] [--trajectories N] [--seed S]
//           [--out FILE] [--threads auto|N]
//
// Subcommands: validate, decay-demo, sense, sweep-dt, sweep-eta,
// sigma-z-demo. Exit codes: 0 success, 1 numerical failure, 2 usage error.

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecsense/protocol.hpp"

namespace ecsense::cli {

struct RunConfig {
  std::string subcommand;
  protocol::ProtocolParams params;
  std::string output_path;  // defaults to "<subcommand>.csv"
  int threads = 0;          // 0 = auto
};

/// Bad command line; the message starts with the offending flag.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses argv (without the program name). Throws UsageError.
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes a parsed configuration; returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with diagnostics on `err`.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecsense::cli
