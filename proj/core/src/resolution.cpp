#include "bemcal/resolution.hpp"

#include "bemcal/error.hpp"

#include <fmt/format.h>

namespace bemcal {

std::string_view name(Resolution r) {
    switch (r) {
        case Resolution::Min1: return "min1";
        case Resolution::Min5: return "min5";
        case Resolution::Min15: return "min15";
        case Resolution::Min30: return "min30";
        case Resolution::Hourly: return "hourly";
        case Resolution::Hour6: return "hour6";
        case Resolution::Daily: return "daily";
        case Resolution::Monthly: return "monthly";
    }
    return "?";
}

std::string_view label(Resolution r) {
    switch (r) {
        case Resolution::Min1: return "1-min";
        case Resolution::Min5: return "5-min";
        case Resolution::Min15: return "15-min";
        case Resolution::Min30: return "30-min";
        case Resolution::Hourly: return "Hourly";
        case Resolution::Hour6: return "6-hour";
        case Resolution::Daily: return "Daily";
        case Resolution::Monthly: return "Monthly";
    }
    return "?";
}

Resolution parse_resolution(std::string_view text) {
    for (const auto r : kAllResolutions) {
        if (text == name(r) || text == label(r)) {
            return r;
        }
    }
    if (text == "1min") return Resolution::Min1;
    if (text == "5min") return Resolution::Min5;
    if (text == "15min") return Resolution::Min15;
    if (text == "30min") return Resolution::Min30;
    if (text == "60min" || text == "1h") return Resolution::Hourly;
    if (text == "6h") return Resolution::Hour6;
    if (text == "1d") return Resolution::Daily;
    throw ValidationError(fmt::format("unknown resolution '{}'", text));
}

Resolution resolution_from_step(std::int64_t seconds) {
    for (const auto r : kAllResolutions) {
        if (!is_calendar(r) && step_seconds(r) == seconds) {
            return r;
        }
    }
    throw ValidationError(fmt::format("interval of {} s is not a supported resolution", seconds));
}

Timestamp advance(Timestamp t, Resolution r) {
    if (is_calendar(r)) {
        return next_month_start(t);
    }
    return t + std::chrono::seconds{step_seconds(r)};
}

bool is_aligned(Timestamp t, Resolution r) {
    if (is_calendar(r)) {
        return month_start(t) == t;
    }
    const auto s = epoch_seconds(t);
    const auto q = step_seconds(r);
    return ((s % q) + q) % q == 0;
}

}  // namespace bemcal
