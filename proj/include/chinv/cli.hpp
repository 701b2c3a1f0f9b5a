#pragma once

namespace chinv {

// Command-line front end over all modules. Returns the process exit code:
// 0 success, 1 usage error, 2 computation error.
int run_cli(int argc, char** argv);

}  // namespace chinv
