#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlp::cli {

enum ExitCode { Ok = 0, Failed = 1, Precondition = 2, UnknownCommand = 64, Unreadable = 66, NumericFailure = 70 };

/// Runs one subcommand; args exclude the program name. Results and error
/// JSON go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const std::vector<std::string>& subcommands();

}  // namespace nlp::cli
