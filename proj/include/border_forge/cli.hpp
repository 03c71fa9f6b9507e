#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "border_forge/error.hpp"

namespace border_forge {

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitGeometry = 3;
inline constexpr int kExitPlanning = 4;

int exit_code_for(ErrorCode code);

// Runs `border_forge <args...>` (args excludes the program name). Results go
// to `out`; diagnostics go to `err` as a human line followed by a JSON line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Reads BORDER_FORGE_LOG (trace, debug, info, warn, error, off).
void configure_logging();

}  // namespace border_forge
