#pragma once

// Built-in checks against independent oracles and the headline acceptance
// experiments. Shared by the `validate` subcommand and the acceptance binary.

#include <functional>
#include <string>
#include <vector>

namespace ecsense::validation {

struct CheckResult {
  std::string id;
  std::string description;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Check {
  std::string id;
  std::string description;
  std::function<CheckResult(int threads)> run;
};

/// Fast oracle and invariant checks (seconds in total).
std::vector<Check> validation_checks();

/// Acceptance experiments A1-A8 at full ensemble size. A9 (CLI determinism)
/// lives with the CLI.
std::vector<Check> acceptance_checks();

/// Runs the checks in order, calling `report` after each one. An exception
/// thrown by a check is reported as a failure.
std::vector<CheckResult> run_checks(const std::vector<Check>& checks, int threads,
                                    const std::function<void(const CheckResult&)>& report = {});

/// "<id> PASS|FAIL <description>: <detail> (<seconds>s)"
std::string format_result(const CheckResult& r);

}  // namespace ecsense::validation
