#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace cardl::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
};

// Runs one `cardl` invocation. args excludes the program name. Results go to
// `out`, diagnostics to `err`.
int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace cardl::cli
