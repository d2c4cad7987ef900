#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace bemcal {

using Timestamp = std::chrono::sys_seconds;
using Day       = std::chrono::sys_days;

/// Parses `YYYY-MM-DDTHH:MM[:SS]` with an optional `Z` or `+HH:MM`/`-HH:MM`
/// suffix (a space may replace the `T`). Offsets are folded into UTC.
/// Throws ValidationError on malformed input.
Timestamp parse_timestamp(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp t);

/// Formats as `YYYY-MM-DD`.
std::string format_day(Day d);

inline std::int64_t epoch_seconds(Timestamp t) { return t.time_since_epoch().count(); }

inline Timestamp from_epoch_seconds(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

inline Day day_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

/// Seconds elapsed since UTC midnight of the same day.
inline std::int64_t seconds_of_day(Timestamp t) { return (t - day_of(t)).count(); }

/// 1-based day of the year.
int day_of_year(Timestamp t);

/// First instant of the calendar month containing `t`.
Timestamp month_start(Timestamp t);

/// First instant of the month following the one that contains `t`.
Timestamp next_month_start(Timestamp t);

}  // namespace bemcal
