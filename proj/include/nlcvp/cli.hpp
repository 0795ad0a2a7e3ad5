#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlcvp::cli {

enum ExitCode : int { ok = 0, usage = 1, config_error = 2, numerical_failure = 3, verdict_failure = 4 };

/// Runs one command. args excludes the program name, e.g.
/// {"solve", "--config", "p.json", "--out", "out"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace nlcvp::cli
