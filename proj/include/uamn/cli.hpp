#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uamn::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kInfeasible = 2,
  kCapExceeded = 3,
  kInvalidInput = 4,
};

// Runs one command line (args excludes the program name). Human-readable
// output goes to out, error records to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uamn::cli
