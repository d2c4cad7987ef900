#pragma once

#include "bemcal/parameters.hpp"
#include "bemcal/profiles.hpp"
#include "bemcal/simulator.hpp"
#include "bemcal/weather.hpp"

#include <cstdint>
#include <span>

namespace bemcal {

/// Generator settings for a complete 1-minute weather record.
struct SyntheticWeatherOptions {
    Site site{};
    Timestamp start{};
    std::size_t days{365};
    std::uint64_t seed{0};
    double mean_temperature{9.5};   ///< degC, annual mean
    double annual_amplitude{9.0};   ///< K, coldest in mid January
    double diurnal_amplitude{4.0};  ///< K, warmest mid afternoon
};

/// Annual and diurnal temperature cycles plus a slow AR(1) anomaly; global
/// irradiance is the extraterrestrial value scaled by a day-to-day cloudiness.
WeatherSeries synthetic_weather(const SyntheticWeatherOptions& options);

/// Independent small perturbation of every field, standing in for a second
/// nearby station.
WeatherSeries perturbed_weather(const WeatherSeries& w, std::uint64_t seed);

/// Marks runs of steps missing in every field.
void inject_weather_gaps(WeatherSeries& w, std::span<const GapSpec> gaps, std::uint64_t seed);

struct TruthScheduleOptions {
    Day first_day{};
    std::size_t days{365};
    std::uint64_t seed{0};
    double away_fraction{0.1};  ///< share of days with nobody home
};

/// 1-minute schedules with three day types (weekday, weekend, away).
/// Occupancy, lighting and appliances share the electricity profile.
ScheduleSet truth_schedules(const TruthScheduleOptions& options);

/// Interior point of the default ranges used as the synthetic truth.
ParameterVector reference_parameters();

}  // namespace bemcal
