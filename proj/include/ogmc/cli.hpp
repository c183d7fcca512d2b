#pragma once

#include <iosfwd>

namespace ogmc::cli {

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2 };

/// Entry point of the `ogmc` tool. Subcommands: repair, skeleton, edge,
/// metrics, synth. Options may also come from a JSON object given with
/// --config whose keys are long option names without dashes; command-line
/// flags take precedence over config values, which take precedence over
/// defaults.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ogmc::cli
