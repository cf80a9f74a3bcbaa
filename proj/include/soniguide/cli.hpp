#ifndef SONIGUIDE_CLI_HPP
#define SONIGUIDE_CLI_HPP

#include <iosfwd>

namespace soniguide {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitUnwritable = 3;
inline constexpr int kExitNoMatches = 4;
inline constexpr int kExitUsage = 64;

// Settings resolve flag > SONIGUIDE_* environment variable > --config file > default.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace soniguide

#endif  // SONIGUIDE_CLI_HPP
