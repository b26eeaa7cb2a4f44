#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reactive {

enum ExitCode { kExitOk = 0, kExitUsage = 2, kExitInvalidScenario = 3, kExitDeadlock = 4 };

/// Per-mode digest printed by `run`.
struct PhaseSummary {
  std::string mode;
  double earlyMean = 0.0;  // steps 1-25
  double lateMean = 0.0;   // steps 26-end
  double total = 0.0;
  int emergencies = 0;
  int recomputes = 0;
};

/// `reactive-sim` entry point with injectable streams.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reactive
