#pragma once

namespace pcfnet {

// Full command-line entry point (subcommands: generate, train, evaluate,
// compare, interpret, filter-demo, gradcheck, robustness). Returns the
// process exit code: 0 success, 1 failed gradient check, 2 usage or
// configuration error, 3 data integrity error.
int run_cli(int argc, const char* const* argv);

}  // namespace pcfnet
