#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tgen::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit-code taxonomy (total): success, pipeline failure, input error,
// configuration error.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConfig = 3;

// Full command surface, callable in-process. `args` excludes the program
// name. Streams carry interactive input, the human-readable summary, and
// error reporting; every successful run writes one manifest into --out.
int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

// Convenience wrapper over std::cin/cout/cerr for main().
int run(int argc, const char* const* argv);

}  // namespace tgen::cli
