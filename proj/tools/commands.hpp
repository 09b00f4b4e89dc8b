#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace molstore::cli {

/// Runs one invocation (args excludes the program name). Returns the process
/// exit status: 0 on success, 2 for a domain error, 64 for a usage error. On
/// failure exactly one line "error: <category>: <message>" goes to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace molstore::cli
