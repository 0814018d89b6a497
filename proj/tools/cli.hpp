#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rpclust::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. Diagnostics go to `err`; artifacts go to files only.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rpclust::cli
