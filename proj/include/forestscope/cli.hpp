#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace forestscope::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfig = 3,
  kInput = 4,
  kIo = 5,
  kLimit = 6,
  kMismatch = 7,
};

/// args excludes the program name. Errors end in one stderr line of the form
/// "error: <kind>: <message>".
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace forestscope::cli
