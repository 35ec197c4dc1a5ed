#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gtopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the gtopt command line: gen-graph, gen-data, solve-ref,
/// run, compare. `args` excludes the program name. Errors are reported as one line on `err`:
///   error: <category>: <message>
/// and mapped to exit status 1 (validation) or 2 (runtime failure).
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gtopt
