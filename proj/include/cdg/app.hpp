#pragma once

#include "cdg/analysis.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cdg {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitConfig = 2 };

/// Raised for invalid command-line configuration; `flag` names the option.
class ConfigError : public Error {
public:
  ConfigError(const std::string& flag, const std::string& what) : Error(flag + ": " + what), flag_(flag) {}
  const std::string& flag() const { return flag_; }

private:
  std::string flag_;
};

/// "A..B" -> A, 2A, 4A, ..., B; "N" -> {N}.
std::vector<int> parse_levels(const std::string& spec);

/// Entry point of the `cdg` tool: subcommands converge, solve, patchtest, raster.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cdg
