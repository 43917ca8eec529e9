#pragma once

#include <ostream>

namespace hetheat {

/// Entry point of the `hetheat` tool: `hetheat run <subcommand> [--config file] [overrides]`.
///
/// Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical failure, 4 I/O failure.
/// Errors are printed to `err` as a single JSON object. Artifacts go to <output_dir>/<run-id>/ and
/// only appear once every file of the run has been written.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hetheat
