#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rugtrace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Artifacts go to the
/// output directory; progress to `out`, errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rugtrace::cli
