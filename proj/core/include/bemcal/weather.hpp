#pragma once

#include "bemcal/resolution.hpp"
#include "bemcal/time.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace bemcal {

struct Site {
    double latitude{47.4};   ///< degrees north
    double longitude{8.6};   ///< degrees east
};

enum class WeatherField : std::uint8_t { DryBulb, DewPoint, RelHumidity, Pressure, WindSpeed, WindDir, Ghi };

inline constexpr std::size_t kWeatherFieldCount = 7;

inline constexpr std::array<WeatherField, kWeatherFieldCount> kAllWeatherFields{
    WeatherField::DryBulb,   WeatherField::DewPoint, WeatherField::RelHumidity, WeatherField::Pressure,
    WeatherField::WindSpeed, WeatherField::WindDir,  WeatherField::Ghi};

/// CSV column name: dry_bulb, dew_point, rh, pressure, wind_speed, wind_dir, ghi.
std::string_view name(WeatherField f);

inline constexpr std::size_t index(WeatherField f) { return static_cast<std::size_t>(f); }

/// Per-step weather records on a uniform grid. Each field carries its own
/// missing mask and a provenance flag set where the value came from a
/// secondary source.
class WeatherSeries {
public:
    WeatherSeries() = default;
    WeatherSeries(Site site, Timestamp start, Resolution resolution, std::size_t steps);

    const Site& site() const { return site_; }
    Timestamp start() const { return start_; }
    Resolution resolution() const { return resolution_; }
    std::size_t size() const { return size_; }
    Timestamp time_at(std::size_t i) const;

    double get(WeatherField f, std::size_t i) const { return values_[index(f)][i]; }
    bool is_missing(WeatherField f, std::size_t i) const { return missing_[index(f)][i]; }
    bool is_filled(WeatherField f, std::size_t i) const { return filled_[index(f)][i]; }

    const std::vector<double>& field(WeatherField f) const { return values_[index(f)]; }

    void set(WeatherField f, std::size_t i, double v);
    void set_missing(WeatherField f, std::size_t i);
    void mark_filled(WeatherField f, std::size_t i) { filled_[index(f)][i] = true; }

    std::size_t missing_count() const;

    /// Throws ValidationError when an observed ghi is negative or rh is
    /// outside [0, 100].
    void validate() const;

private:
    Site site_{};
    Timestamp start_{};
    Resolution resolution_{Resolution::Min1};
    std::size_t size_{0};
    std::array<std::vector<double>, kWeatherFieldCount> values_{};
    std::array<std::vector<bool>, kWeatherFieldCount> missing_{};
    std::array<std::vector<bool>, kWeatherFieldCount> filled_{};
};

inline constexpr double kSolarConstant = 1367.0;  // W/m2

struct SolarPosition {
    double zenith_cosine{0.0};
    double extraterrestrial_horizontal{0.0};  ///< W/m2 on a horizontal plane
};

/// Cooper declination, Spencer eccentricity and equation of time, hour angle
/// from apparent solar time:
///
///   decl   = 23.45 deg * sin(360 deg * (284 + n) / 365)
///   G      = 2 pi (n - 1) / 365
///   E0     = 1.000110 + 0.034221 cos G + 0.001280 sin G + 0.000719 cos 2G + 0.000077 sin 2G
///   EoT    = 229.18 (0.000075 + 0.001868 cos G - 0.032077 sin G - 0.014615 cos 2G - 0.04089 sin 2G) min
///   omega  = 15 deg * (utc_hours + lon / 15 + EoT / 60 - 12)
///   cos z  = sin(lat) sin(decl) + cos(lat) cos(decl) cos(omega), clamped to [0, 1]
///   G0h    = 1367 * E0 * cos z
SolarPosition solar_geometry(const Site& site, Timestamp t);

struct SolarSplit {
    double dhi{0.0};  ///< diffuse horizontal, W/m2
    double dni{0.0};  ///< direct normal, W/m2
};

/// Reduced (clearness-index only) Reindl diffuse-fraction correlation:
///   kt <= 0.3        fd = 1.020 - 0.248 kt
///   0.3 < kt < 0.78  fd = 1.45 - 1.67 kt
///   kt >= 0.78       fd = 0.147
double reindl_diffuse_fraction(double kt);

/// Splits global horizontal irradiance into diffuse horizontal and direct
/// normal parts. fd is clamped to [0.147, 1]. Near the horizon (zenith
/// cosine < 0.01) everything is diffuse, and dni never exceeds the
/// extraterrestrial normal irradiance; both keep dhi + dni cos z == ghi.
SolarSplit reindl_split(double ghi, double zenith_cosine, double extraterrestrial_horizontal);

/// Applies the split to every step, evaluating the sun at interval midpoints.
std::vector<SolarSplit> split_irradiance(const WeatherSeries& w);

/// Replaces missing primary values with the secondary value at the same
/// timestamp and flags them. Throws ValidationError listing the first
/// timestamp and field missing in both sources.
WeatherSeries infill_weather(const WeatherSeries& primary, const WeatherSeries& secondary);

/// Averages intensive quantities onto a coarser grid no coarser than hourly.
/// Wind direction uses the vector (circular) mean. An output value is missing
/// if any covered input is missing.
WeatherSeries resample_weather(const WeatherSeries& w, Resolution target);

/// Drops steps outside [from, to).
WeatherSeries slice(const WeatherSeries& w, Timestamp from, Timestamp to);

namespace csv {

/// Reads `timestamp,dry_bulb,dew_point,rh,pressure,wind_speed,wind_dir,ghi`
/// (extra trailing columns such as dhi,dni are ignored).
WeatherSeries load_weather(const std::filesystem::path& path, const Site& site);

/// Writes the input columns followed by the derived `dhi,dni`.
void write_weather(const std::filesystem::path& path, const WeatherSeries& w);

}  // namespace csv

}  // namespace bemcal
