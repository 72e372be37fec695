#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace relprop {

/// Shortest round-trip decimal form (std::to_chars), so CSV emit/parse/emit
/// is byte-stable.
std::string format_double(double value);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

/// Splits one CSV line on commas. No quoting support: fields must not
/// contain commas, which all of our formats guarantee.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads all lines, dropping a trailing empty line; \r\n tolerated.
std::vector<std::string> read_lines(const std::string& text);

}  // namespace relprop
