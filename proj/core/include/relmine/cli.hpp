#pragma once

namespace relmine::cli {

// Full command-line surface. Returns the process exit status:
// 0 success, 1 usage/config error, 2 data error, 3 numeric error.
int run(int argc, const char* const* argv);

}  // namespace relmine::cli
