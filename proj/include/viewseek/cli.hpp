#pragma once

namespace viewseek {

/// Exit codes: 0 success, 1 configuration error, 2 I/O error.
int run_cli(int argc, char** argv);

}  // namespace viewseek
