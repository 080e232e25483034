#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace concierge::cli {

enum ExitCode : int {
  kExitOk = 0,
  /// Validation findings, bad input or bad usage.
  kExitFindings = 1,
  /// Backend or service unreachable.
  kExitConnectivity = 2,
  kExitInternal = 3,
};

/// Entry point shared by the `concierge` binary and tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace concierge::cli
