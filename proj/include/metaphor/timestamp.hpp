#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace metaphor {

using TimePoint = std::chrono::sys_seconds;

/// Parses the timestamp shapes that occur in post exports:
///   2018-05-03T12:34:56Z, 2018-05-03T12:34:56+00:00, 2018-05-03 12:34:56,
///   2018-05-03, 2018-05 and the legacy "Thu May 03 12:34:56 +0000 2018".
/// Returns nullopt on anything else, including out-of-range fields.
std::optional<TimePoint> parse_timestamp(std::string_view s);

// UTC, second resolution: 2018-05-03T12:34:56Z
std::string format_timestamp(TimePoint t);

struct YearMonth {
  int year = 0;
  int month = 0;  // 1..12

  int linear_index() const { return year * 12 + month; }
  friend bool operator==(const YearMonth&, const YearMonth&) = default;
};

YearMonth year_month_of(TimePoint t);

}  // namespace metaphor
