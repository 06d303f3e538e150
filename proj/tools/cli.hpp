#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dprof {

/// Exit codes of the dprof tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitNotConverged = 1,
  kExitConfig = 2,
  kExitIo = 3,
};

/// Runs the dprof command line. Regular output goes to out; errors are
/// reported on err as one JSON object per line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dprof
