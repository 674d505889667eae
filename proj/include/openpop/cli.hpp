#ifndef OPENPOP_CLI_HPP
#define OPENPOP_CLI_HPP

namespace openpop {

/// Command-line entry point. Exit codes: 0 success, 2 configuration error,
/// 3 degenerate fit / no admissible family, 1 other failure.
int run_cli(int argc, const char* const* argv);

} // namespace openpop

#endif // OPENPOP_CLI_HPP
