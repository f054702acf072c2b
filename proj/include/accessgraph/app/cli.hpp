#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace accessgraph::app {

/// Runs one command line (without the program name). Results are written to
/// `out` as JSON; errors as {"error": {"code", "message"}} on `out` plus a
/// one-line message on `err`. Returns 0 on success, 1 for user errors and 2
/// for internal failures.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace accessgraph::app
