#pragma once

#include "bemcal/resolution.hpp"
#include "bemcal/time.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bemcal {

enum class Channel : std::uint8_t { Heating, Cooling, Electricity, DHW };

inline constexpr std::array<Channel, 4> kAllChannels{Channel::Heating, Channel::Cooling, Channel::Electricity,
                                                     Channel::DHW};

std::string_view name(Channel c);
Channel parse_channel(std::string_view text);

inline constexpr std::size_t index(Channel c) { return static_cast<std::size_t>(c); }

/// Uniformly sampled interval energies (kWh per step) for one metered channel.
///
/// Timestamps are implicit: step i starts at advance^i(start). Missing entries
/// hold NaN in `values()` and are flagged in `missing()`. Instances are
/// immutable once constructed.
class MeteredSeries {
public:
    MeteredSeries() = default;

    /// Validates lengths and non-negativity of observed values. Entries whose
    /// mask is set are stored as NaN regardless of the passed value.
    MeteredSeries(Channel channel, Timestamp start, Resolution resolution, std::vector<double> values,
                  std::vector<bool> missing);

    /// Fully observed series.
    MeteredSeries(Channel channel, Timestamp start, Resolution resolution, std::vector<double> values);

    Channel channel() const { return channel_; }
    Timestamp start() const { return start_; }
    Resolution resolution() const { return resolution_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    const std::vector<double>& values() const { return values_; }
    const std::vector<bool>& missing() const { return missing_; }

    double value(std::size_t i) const { return values_[i]; }
    bool is_missing(std::size_t i) const { return missing_[i]; }

    std::size_t observed_count() const;
    std::size_t missing_count() const { return size() - observed_count(); }

    /// Start time of step i.
    Timestamp time_at(std::size_t i) const;

    /// Exclusive end of the covered span.
    Timestamp end() const { return time_at(size()); }

    /// Sum of the observed values.
    double observed_total() const;

private:
    Channel channel_{Channel::Heating};
    Timestamp start_{};
    Resolution resolution_{Resolution::Min1};
    std::vector<double> values_;
    std::vector<bool> missing_;
};

/// Measured and simulated values paired on the indices where the measurement
/// was observed.
struct AlignedPair {
    std::vector<double> measured;
    std::vector<double> simulated;

    std::size_t count() const { return measured.size(); }
};

/// Energy aggregation to a coarser (or equal) resolution. Each output value is
/// the sum of the covered inputs; an output interval is missing iff any
/// covered input is missing. The source must start on a target boundary and
/// cover a whole number of target intervals.
MeteredSeries aggregate(const MeteredSeries& series, Resolution target);

/// Default maximum interpolated gap: three hours.
inline constexpr std::int64_t kDefaultMaxGapSeconds = 10800;

/// Linear interpolation across interior gaps whose missing duration
/// (missing steps x step length) is at most `max_gap_seconds`. Longer gaps and
/// leading/trailing gaps stay missing. Requires at least two observed values.
MeteredSeries infill_linear(const MeteredSeries& series, std::int64_t max_gap_seconds = kDefaultMaxGapSeconds);

/// Pairs measured and simulated values, dropping measurement-missing indices.
/// Metadata (channel, resolution, start, length) must match.
AlignedPair align(const MeteredSeries& measured, const MeteredSeries& simulated);

/// Day-by-day view of a series finer than daily.
struct DayMatrix {
    Resolution resolution{Resolution::Hourly};
    Day first_day{};
    std::size_t steps_per_day{0};
    std::vector<std::vector<double>> rows;  ///< one per calendar day, NaN where missing
    std::vector<bool> excluded;             ///< day holds at least one missing value

    std::size_t days() const { return rows.size(); }
    std::size_t included_count() const;
};

/// Reshapes a whole-day series (start at UTC midnight, length a multiple of
/// steps per day) into one row per day.
DayMatrix reshape_daily(const MeteredSeries& series);

/// Step-hold (fine target) or averaging (coarse target) of a per-step signal
/// with the given step length onto another fixed grid; used for schedules and
/// intensive quantities. `source_step` and `target_step` must divide one another.
std::vector<double> resample_intensive(std::span<const double> values, std::int64_t source_step,
                                       std::int64_t target_step);

}  // namespace bemcal
