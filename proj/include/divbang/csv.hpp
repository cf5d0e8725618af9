#pragma once

#include <string>

#include <fmt/format.h>

namespace divbang {

/// Shortest decimal that round-trips exactly, locale independent.
inline std::string csv_double(double v) { return fmt::format("{}", v); }

} // namespace divbang
