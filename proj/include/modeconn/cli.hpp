#pragma once

#include <string>
#include <vector>

namespace modeconn {

/// Entry point behind the modeconn binary. Subcommands: gen-csbm, train,
/// interpolate, bezier, barrier, landscape, bounds, dmc, transfer, sweep,
/// report. Returns 0 on success; module errors map to exit code
/// 10 + error code with a JSON error record on stderr.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, const char* const* argv);

}  // namespace modeconn
