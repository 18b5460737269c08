#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace weierlab {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInvariantFailed = 1;
inline constexpr int kBadInput = 2;

// Runs one subcommand; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weierlab
