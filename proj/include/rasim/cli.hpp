#pragma once

#include <iosfwd>

namespace rasim {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,         // startup or I/O failure
  kExitConfig = 2,          // invalid flags or configuration
  kExitProtocol = 3,        // malformed recording, log or message; protocol version mismatch
  kExitReplayMismatch = 4,  // replay diverged from the recorded run
};

/// Entry point behind the rasim_cli binary: run, bot, replay and report subcommands.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rasim
