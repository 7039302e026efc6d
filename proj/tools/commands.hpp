#pragma once

#include <iosfwd>

#include "mframe/report.hpp"

namespace mf::cli {

enum Exit : int { ok = 0, verification_failure = 1, input_error = 2, budget_exceeded = 3 };

// Parses the command line and runs the selected command.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace mf::cli
