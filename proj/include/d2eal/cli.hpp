#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace d2eal {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Command-line front end. args[0] is the program name.
/// Subcommands: run, montecarlo, sweep, audit, compare.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace d2eal
