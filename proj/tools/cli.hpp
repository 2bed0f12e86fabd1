#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace curemix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// Seed used when --seed is not given.
inline constexpr unsigned long long kDefaultSeed = 20240601ULL;

// Runs the command line tool; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a hash rendered as 16 hex digits.
std::string config_hash(const std::string& canonical);

}  // namespace curemix::cli
