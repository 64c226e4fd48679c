#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace epibench::csv {

/// Shortest decimal text that parses back to exactly `value`. Integral values
/// print without a fractional part, so counts stay readable.
std::string format_number(double value);

/// Splits one record on commas. Quoted fields (RFC 4180 double quotes) are
/// unquoted; embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

/// Strict full-field numeric parse; throws ParseError with `context`.
double parse_number(std::string_view field, std::string_view context);

std::string join_record(const std::vector<std::string>& fields);

}  // namespace epibench::csv
