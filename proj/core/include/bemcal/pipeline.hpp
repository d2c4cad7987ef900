#pragma once

#include "bemcal/profiles.hpp"
#include "bemcal/series.hpp"
#include "bemcal/weather.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bemcal {

struct PrepareOptions {
    std::int64_t max_gap_seconds{kDefaultMaxGapSeconds};
    MiningOptions mining{};
    std::vector<Resolution> resolutions{kAllResolutions.begin(), kAllResolutions.end()};
};

/// A run of measurement steps left missing after infill.
struct RetainedGap {
    Channel channel{Channel::Heating};
    Timestamp start{};
    Timestamp end{};  ///< exclusive
    std::size_t steps{0};
};

/// Calibration-ready data: infilled measurements and schedules per
/// calibration resolution, weather per simulation step.
struct PreparedBundle {
    Site site{};
    std::map<Resolution, std::vector<MeteredSeries>> measurements;  ///< four channels each
    std::map<Resolution, WeatherSeries> weather;                     ///< 1-minute to hourly
    std::map<Resolution, ScheduleSet> schedules;
    std::vector<RetainedGap> retained_gaps;
    std::map<Resolution, std::string> skipped;  ///< resolutions that could not be prepared, with the reason

    const std::vector<MeteredSeries>& min1() const;
    std::vector<Resolution> resolutions() const;
};

/// Infill, weather merge, per-resolution aggregation and profile mining.
/// `measurements` are the four 1-minute channels. A resolution whose
/// aggregation or mining fails is recorded in `skipped`; 1-minute failures throw.
PreparedBundle prepare(std::span<const MeteredSeries> measurements, const WeatherSeries& primary,
                       const WeatherSeries& secondary, const PrepareOptions& options);

/// Files below `dir`:
///   bundle.json                                   index and schedule resolutions
///   measurements/<resolution>/<channel>.csv
///   weather/<resolution>.csv                      1-minute to hourly, with dhi,dni
///   schedules/<resolution>/<role>_profiles.csv, <role>_days.csv
///   gaps.csv                                      channel,start,end,steps
/// Returns the written paths in a fixed order.
std::vector<std::filesystem::path> write_bundle(const PreparedBundle& bundle, const std::filesystem::path& dir);

PreparedBundle load_bundle(const std::filesystem::path& dir);

}  // namespace bemcal
