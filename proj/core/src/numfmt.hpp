#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace scenmap::detail {

// Shortest text that survives a round trip through `%.{digits}g`.
std::string format_sig(double value, int digits = 12);
std::string format_fixed(double value, int decimals);
std::string format_optional(const std::optional<double>& value, int digits = 12);

// Rounds to `digits` significant digits; used before handing numbers to JSON.
double round_sig(double value, int digits = 12);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);
std::string_view trim(std::string_view text);

}  // namespace scenmap::detail
