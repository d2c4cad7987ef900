#include "bemcal/series.hpp"

#include "bemcal/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace bemcal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Number of source steps covered by the target interval starting at `t`.
std::size_t covered_steps(Timestamp t, Resolution source, Resolution target) {
    const auto src = step_seconds(source);
    if (is_calendar(target)) {
        return static_cast<std::size_t>((epoch_seconds(next_month_start(t)) - epoch_seconds(t)) / src);
    }
    return static_cast<std::size_t>(step_seconds(target) / src);
}

}  // namespace

std::string_view name(Channel c) {
    switch (c) {
        case Channel::Heating: return "heating";
        case Channel::Cooling: return "cooling";
        case Channel::Electricity: return "electricity";
        case Channel::DHW: return "dhw";
    }
    return "?";
}

Channel parse_channel(std::string_view text) {
    for (const auto c : kAllChannels) {
        if (text == name(c)) {
            return c;
        }
    }
    throw ValidationError(fmt::format("unknown channel '{}'", text));
}

MeteredSeries::MeteredSeries(Channel channel, Timestamp start, Resolution resolution, std::vector<double> values,
                             std::vector<bool> missing)
    : channel_(channel), start_(start), resolution_(resolution), values_(std::move(values)),
      missing_(std::move(missing)) {
    if (values_.size() != missing_.size()) {
        throw ValidationError(fmt::format("{} series: {} values but {} missing flags", name(channel_),
                                          values_.size(), missing_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (missing_[i]) {
            values_[i] = kNaN;
            continue;
        }
        if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
            throw ValidationError(fmt::format("{} series: invalid energy {} at {}", name(channel_), values_[i],
                                              format_timestamp(time_at(i))));
        }
    }
}

MeteredSeries::MeteredSeries(Channel channel, Timestamp start, Resolution resolution, std::vector<double> values)
    : MeteredSeries(channel, start, resolution, values, std::vector<bool>(values.size(), false)) {}

std::size_t MeteredSeries::observed_count() const {
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), false));
}

Timestamp MeteredSeries::time_at(std::size_t i) const {
    if (!is_calendar(resolution_)) {
        return start_ + std::chrono::seconds{step_seconds(resolution_) * static_cast<std::int64_t>(i)};
    }
    auto t = start_;
    for (std::size_t k = 0; k < i; ++k) {
        t = next_month_start(t);
    }
    return t;
}

double MeteredSeries::observed_total() const {
    double total = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!missing_[i]) {
            total += values_[i];
        }
    }
    return total;
}

MeteredSeries aggregate(const MeteredSeries& series, Resolution target) {
    const auto source = series.resolution();
    if (finer_than(target, source)) {
        throw ValidationError(fmt::format("cannot aggregate {} series to finer resolution {}", name(source),
                                          name(target)));
    }
    if (target == source) {
        return series;
    }
    if (is_calendar(source)) {
        throw ValidationError("monthly series cannot be aggregated further");
    }
    if (!is_aligned(series.start(), target)) {
        throw ValidationError(fmt::format("series start {} is not aligned to a {} boundary",
                                          format_timestamp(series.start()), name(target)));
    }
    std::vector<double> values;
    std::vector<bool> missing;
    std::size_t pos = 0;
    auto t          = series.start();
    while (pos < series.size()) {
        const auto n = covered_steps(t, source, target);
        if (pos + n > series.size()) {
            throw ValidationError(fmt::format("{} series ends inside a {} interval starting {}",
                                              name(series.channel()), name(target), format_timestamp(t)));
        }
        double sum = 0.0;
        bool gap   = false;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (series.is_missing(i)) {
                gap = true;
            } else {
                sum += series.value(i);
            }
        }
        values.push_back(gap ? kNaN : sum);
        missing.push_back(gap);
        pos += n;
        t = advance(t, target);
    }
    return {series.channel(), series.start(), target, std::move(values), std::move(missing)};
}

MeteredSeries infill_linear(const MeteredSeries& series, std::int64_t max_gap_seconds) {
    if (is_calendar(series.resolution())) {
        throw ValidationError("gap infill requires a fixed-step resolution");
    }
    if (series.observed_count() == 0) {
        throw ValidationError(fmt::format("{} series is entirely missing", name(series.channel())));
    }
    if (series.observed_count() < 2) {
        throw ValidationError(fmt::format("{} series needs at least two observed values for interpolation",
                                          name(series.channel())));
    }
    const auto step = step_seconds(series.resolution());
    auto values     = series.values();
    auto missing    = series.missing();

    std::size_t last_obs = series.size();
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (missing[i]) {
            continue;
        }
        if (last_obs != series.size() && i > last_obs + 1) {
            const auto gap_steps = static_cast<std::int64_t>(i - last_obs - 1);
            if (gap_steps * step <= max_gap_seconds) {
                const double v0   = values[last_obs];
                const double v1   = values[i];
                const double span = static_cast<double>(i - last_obs);
                for (std::size_t j = last_obs + 1; j < i; ++j) {
                    values[j]  = v0 + (v1 - v0) * static_cast<double>(j - last_obs) / span;
                    missing[j] = false;
                }
            }
        }
        last_obs = i;
    }
    return {series.channel(), series.start(), series.resolution(), std::move(values), std::move(missing)};
}

AlignedPair align(const MeteredSeries& measured, const MeteredSeries& simulated) {
    if (measured.channel() != simulated.channel() || measured.resolution() != simulated.resolution() ||
        measured.start() != simulated.start() || measured.size() != simulated.size()) {
        throw ValidationError(fmt::format("cannot align {} {} series ({} steps from {}) with {} {} series ({} "
                                          "steps from {})",
                                          name(measured.channel()), name(measured.resolution()), measured.size(),
                                          format_timestamp(measured.start()), name(simulated.channel()),
                                          name(simulated.resolution()), simulated.size(),
                                          format_timestamp(simulated.start())));
    }
    AlignedPair pair;
    pair.measured.reserve(measured.size());
    pair.simulated.reserve(measured.size());
    for (std::size_t i = 0; i < measured.size(); ++i) {
        if (measured.is_missing(i) || simulated.is_missing(i)) {
            continue;
        }
        pair.measured.push_back(measured.value(i));
        pair.simulated.push_back(simulated.value(i));
    }
    if (pair.count() == 0) {
        throw ValidationError(fmt::format("empty alignment for {} series", name(measured.channel())));
    }
    return pair;
}

std::size_t DayMatrix::included_count() const {
    return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), false));
}

DayMatrix reshape_daily(const MeteredSeries& series) {
    if (!finer_than(series.resolution(), Resolution::Daily)) {
        throw ValidationError(fmt::format("daily reshape requires a sub-daily series, got {}",
                                          name(series.resolution())));
    }
    if (seconds_of_day(series.start()) != 0) {
        throw ValidationError(fmt::format("series start {} is not a UTC midnight", format_timestamp(series.start())));
    }
    const auto per_day = static_cast<std::size_t>(86400 / step_seconds(series.resolution()));
    if (series.size() % per_day != 0) {
        throw ValidationError(fmt::format("series of {} steps does not span whole days ({} steps per day)",
                                          series.size(), per_day));
    }
    DayMatrix m;
    m.resolution    = series.resolution();
    m.first_day     = day_of(series.start());
    m.steps_per_day = per_day;
    const auto days = series.size() / per_day;
    m.rows.reserve(days);
    m.excluded.reserve(days);
    for (std::size_t d = 0; d < days; ++d) {
        const auto first = series.values().begin() + static_cast<std::ptrdiff_t>(d * per_day);
        m.rows.emplace_back(first, first + static_cast<std::ptrdiff_t>(per_day));
        bool gap = false;
        for (std::size_t s = 0; s < per_day; ++s) {
            gap = gap || series.is_missing(d * per_day + s);
        }
        m.excluded.push_back(gap);
    }
    return m;
}

std::vector<double> resample_intensive(std::span<const double> values, std::int64_t source_step,
                                       std::int64_t target_step) {
    if (source_step <= 0 || target_step <= 0) {
        throw ValidationError("resampling steps must be positive");
    }
    if (source_step == target_step) {
        return {values.begin(), values.end()};
    }
    std::vector<double> out;
    if (target_step < source_step) {
        if (source_step % target_step != 0) {
            throw ValidationError(fmt::format("step {} s does not divide {} s", target_step, source_step));
        }
        const auto factor = static_cast<std::size_t>(source_step / target_step);
        out.reserve(values.size() * factor);
        for (const double v : values) {
            out.insert(out.end(), factor, v);
        }
        return out;
    }
    if (target_step % source_step != 0) {
        throw ValidationError(fmt::format("step {} s does not divide {} s", source_step, target_step));
    }
    const auto factor = static_cast<std::size_t>(target_step / source_step);
    if (values.size() % factor != 0) {
        throw ValidationError("signal does not cover a whole number of target steps");
    }
    out.reserve(values.size() / factor);
    for (std::size_t i = 0; i < values.size(); i += factor) {
        double sum = 0.0;
        for (std::size_t j = i; j < i + factor; ++j) {
            sum += values[j];
        }
        out.push_back(sum / static_cast<double>(factor));
    }
    return out;
}

}  // namespace bemcal
