// cli.hpp: command-line front end

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfskit {

inline constexpr int exit_success = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_usage = 2;

// args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dfskit
