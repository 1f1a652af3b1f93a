#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "capillary/cli/config.hpp"

namespace capillary::cli {

enum ExitCode { kAllPassed = 0, kCheckFailed = 1, kExecutionError = 2 };

/// Runs the configured checks and writes both reports; errors are reported on `log`.
int run(const RunConfig& cfg, std::ostream& log);
int sweep(const RunConfig& cfg, const std::string& parameter, const std::vector<std::string>& values,
          std::ostream& log);
void print_scenarios(std::ostream& out);

}  // namespace capillary::cli
