#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdi::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr unsigned long long kDefaultSeed = 2018;

/// Entry point behind the `fdi` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on a domain error (bad input file, divergence,
/// infeasible attack design, ...) and 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdi::cli
