#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace darklabel {

/// Command-line front end. Returns the process exit status: 0 on success, 1
/// on a module error (reported on `err` as "<Code>: message [details]"), and
/// CLI11's nonzero parse status on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Every subcommand path the CLI accepts, e.g. "sample random".
std::vector<std::string> cli_command_paths();

}  // namespace darklabel
