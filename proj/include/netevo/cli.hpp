#ifndef NETEVO_CLI_HPP
#define NETEVO_CLI_HPP

namespace netevo {

/// Command-line driver. Exit codes: 0 success, 1 usage, 2 data error,
/// 3 numeric failure. Data goes to stdout (or --out), logs to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace netevo

#endif  // NETEVO_CLI_HPP
