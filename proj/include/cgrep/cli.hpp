#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cgrep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Parses and runs one subcommand; args excludes the program name.
/// Errors are reported on `err` and mapped to exit codes, never thrown.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace cgrep::cli
