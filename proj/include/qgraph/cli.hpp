#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qgraph::cli {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;  // also: a verify check failed

/// Runs `qgraph <command> ...`; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qgraph::cli
