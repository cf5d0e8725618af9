#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace divbang::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs the command line `args` (without the program name).
/// Returns 0 on success, 1 on runtime failure, 2 on usage or config errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of `text`.
std::string sha256_hex(const std::string& text);

} // namespace divbang::cli
