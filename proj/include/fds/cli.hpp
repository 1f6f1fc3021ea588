#ifndef FDS_CLI_HPP
#define FDS_CLI_HPP

namespace fds {

// Entry point for the `fds` command-line tool. Returns the process exit
// code: 0 on success, 1 on data or model errors, 2 on usage errors.
int run_cli(int argc, const char* const* argv);

}  // namespace fds

#endif  // FDS_CLI_HPP
