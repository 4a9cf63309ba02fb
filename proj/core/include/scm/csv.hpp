#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scm {

/// Shortest round-trip decimal representation; "nan"/"inf" spelled out.
std::string format_number(double value);
std::string format_number(std::int64_t value);
std::string format_optional(const std::optional<double>& value);

/// Splits one CSV record on commas. Quoted fields are not supported.
std::vector<std::string> split_csv_line(std::string_view line);

std::string_view trim(std::string_view text);

}  // namespace scm
