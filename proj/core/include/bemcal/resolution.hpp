#pragma once

#include "bemcal/time.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace bemcal {

/// The eight calibration time steps, ordered fine to coarse.
enum class Resolution : std::uint8_t { Min1, Min5, Min15, Min30, Hourly, Hour6, Daily, Monthly };

inline constexpr std::array<Resolution, 8> kAllResolutions{
    Resolution::Min1,   Resolution::Min5,  Resolution::Min15, Resolution::Min30,
    Resolution::Hourly, Resolution::Hour6, Resolution::Daily, Resolution::Monthly};

/// Fixed step length in seconds; 0 for Monthly, whose length follows the calendar.
constexpr std::int64_t step_seconds(Resolution r) {
    switch (r) {
        case Resolution::Min1: return 60;
        case Resolution::Min5: return 300;
        case Resolution::Min15: return 900;
        case Resolution::Min30: return 1800;
        case Resolution::Hourly: return 3600;
        case Resolution::Hour6: return 21600;
        case Resolution::Daily: return 86400;
        case Resolution::Monthly: return 0;
    }
    return 0;
}

constexpr bool is_calendar(Resolution r) { return r == Resolution::Monthly; }

constexpr int rank(Resolution r) { return static_cast<int>(r); }

constexpr bool finer_than(Resolution a, Resolution b) { return rank(a) < rank(b); }

constexpr bool coarser_than(Resolution a, Resolution b) { return rank(a) > rank(b); }

/// Simulation never runs coarser than hourly; coarser calibrations aggregate
/// hourly output.
constexpr Resolution simulation_step(Resolution r) { return coarser_than(r, Resolution::Hourly) ? Resolution::Hourly : r; }

/// Short machine name: min1, min5, min15, min30, hourly, hour6, daily, monthly.
std::string_view name(Resolution r);

/// Human label used in reports, e.g. "1-min", "6-hour".
std::string_view label(Resolution r);

/// Accepts the machine names and a few aliases ("1min", "60min", "1h", "6h", "1d").
Resolution parse_resolution(std::string_view text);

/// Resolution whose fixed step equals `seconds`; throws if none matches.
Resolution resolution_from_step(std::int64_t seconds);

/// Start of the interval following the one that begins at `t`.
Timestamp advance(Timestamp t, Resolution r);

/// True when `t` is a boundary of the `r` grid (UTC midnight based; month
/// starts for Monthly).
bool is_aligned(Timestamp t, Resolution r);

}  // namespace bemcal
