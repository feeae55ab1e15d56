#pragma once

#include <iosfwd>

namespace ethlab::cli {

enum ExitCode { kSuccess = 0, kRuntimeFailure = 1, kConfigError = 2 };

/// Parses argv, runs one subcommand and writes its manifest. Diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// ETHLAB_THREADS, or the hardware concurrency when unset. Throws ConfigError on junk.
unsigned worker_count();

}  // namespace ethlab::cli
