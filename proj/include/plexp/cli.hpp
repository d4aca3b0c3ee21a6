#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plexp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

inline constexpr unsigned long long kDefaultSeed = 20240101ULL;

// Runs the command line tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plexp::cli
