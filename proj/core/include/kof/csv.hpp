#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kof::csv {

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

// Empty string for NaN (the "missing" convention of every CSV we write).
std::string format_optional(double value);

std::vector<std::string> split_line(std::string_view line);

std::string_view trim(std::string_view s);

}  // namespace kof::csv
