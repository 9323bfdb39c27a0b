#pragma once

#include <ostream>

#include "spectre/config.hpp"

namespace spectre {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

/// Runs one validated command. Summaries go to `out`, errors to `err`;
/// returns an exit code. Figure commands write one CSV per curve under
/// `cfg.output`, with a `.partial` suffix if a trial fails.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace spectre
