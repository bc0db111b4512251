#pragma once

namespace rankfair::cli {

// Full command-line entry point. Exit codes: 0 success, 1 runtime failure,
// 2 usage or validation error.
int run(int argc, const char* const* argv);

}  // namespace rankfair::cli
