#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcf::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDomainFailure = 2, kIoFailure = 3 };

/// Runs one `pcf` invocation. `args` excludes the program name.
int run_pipeline(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcf::cli
