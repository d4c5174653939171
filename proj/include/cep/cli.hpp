#pragma once

#include <iosfwd>

namespace cep::cli {

/// Exit codes shared by every subcommand.
enum Exit : int { kOk = 0, kIo = 1, kUsage = 2, kNumeric = 3 };

/// Entry point of the `cep` tool; writes results to `out` and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cep::cli
