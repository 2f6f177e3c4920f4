#pragma once

#include <string>
#include <vector>

namespace hspim {

// Whole command surface behind one entry point so tests can drive it
// in-process. Returns the process exit code: 0 success, 1 pipeline or
// provider failure, 2 usage/config error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace hspim
