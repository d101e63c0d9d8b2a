#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mospa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitVerification = 2;
inline constexpr int kExitUsage = 64;

/// Runs one subcommand. argv[0] is the program name. Data goes to the
/// --output file (plus a .json report for verify and prop1); the human
/// summary and timing go to `log`.
int run(int argc, const char* const* argv, std::ostream& log);

int run(const std::vector<std::string>& args, std::ostream& log);

/// Shortest decimal that round-trips to the same double.
std::string format_real(double x);

}  // namespace mospa::cli
