#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbec::cli {

enum ExitCode { ok = 0, failed = 1, input_error = 2 };

// args excludes the program name: {"scatter", "--config", "run.json", ...}
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cbec::cli
