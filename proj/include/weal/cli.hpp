#pragma once

namespace weal {

// exit codes: 0 success, 1 usage error (help text on stderr), 2 runtime or
// config error
int run_cli(int argc, const char* const* argv);

}  // namespace weal
