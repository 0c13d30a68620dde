#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kstep {

using Config = std::map<std::string, std::string>;

/// Flat key=value file; '#' starts a comment, blank lines are ignored.
Config read_config_file(const std::string& path);

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on usage or validation errors, 2 on runtime failures.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kstep
