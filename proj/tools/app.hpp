// Command line front end. run() is main() without the process: it returns
// the exit status and writes messages to the given streams.
#pragma once

#include <iosfwd>

namespace panelfx::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // unexpected runtime failure
  kMissingInput = 2,  // an input file does not exist
  kBadConfig = 3,     // config validation; message names the field
  kBadData = 4,       // input exists but cannot be parsed or used
  kUsage = 64,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace panelfx::cli
