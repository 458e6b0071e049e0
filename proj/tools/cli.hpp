#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dynmap::cli {

// Exit codes: 0 success, 1 domain error, 2 usage or parse error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (without the program name). The REPL reads from `in`.
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err);

}  // namespace dynmap::cli
