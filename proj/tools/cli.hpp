#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace its::cli {

/// Runs one subcommand. args excludes the program name. Diagnostics go to
/// err; the return value is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "a..b" (inclusive integer range) or a comma-separated list.
std::vector<double> parse_box_sizes(const std::string& text);

}  // namespace its::cli
