#include "bemcal/synthetic.hpp"

#include "bemcal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bemcal {

namespace {

constexpr std::size_t kMinutesPerDay = 1440;
constexpr double kTwoPi              = 2.0 * std::numbers::pi;

double magnus_rh(double dry_bulb, double dew_point) {
    const auto e = [](double t) { return std::exp(17.625 * t / (243.04 + t)); };
    return std::clamp(100.0 * e(dew_point) / e(dry_bulb), 0.0, 100.0);
}

class Ar1 {
public:
    Ar1(double correlation_minutes, double sd)
        : phi_(std::exp(-1.0 / correlation_minutes)), innovation_(sd * std::sqrt(1.0 - phi_ * phi_)), sd_(sd) {}

    template <class Rng>
    double start(Rng& rng) {
        state_ = sd_ * normal_(rng);
        return state_;
    }

    template <class Rng>
    double next(Rng& rng) {
        state_ = phi_ * state_ + innovation_ * normal_(rng);
        return state_;
    }

private:
    double phi_;
    double innovation_;
    double sd_;
    double state_{0.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

struct DayTemplates {
    std::vector<double> electricity;
    std::vector<double> dhw;
};

// Adds `level` over [from, from + minutes), minutes since midnight.
void block(std::vector<double>& day, int from, int minutes, double level) {
    for (int m = std::max(from, 0); m < std::min(from + minutes, static_cast<int>(kMinutesPerDay)); ++m) {
        day[static_cast<std::size_t>(m)] += level;
    }
}

DayTemplates make_templates(int type, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> jitter(-12, 12);
    const auto at = [&](int hour, int minute) { return hour * 60 + minute + jitter(rng); };

    std::vector<double> e(kMinutesPerDay, 0.03);
    const int fridge_phase = std::uniform_int_distribution<int>(0, 44)(rng);
    for (int m = 0; m < static_cast<int>(kMinutesPerDay); ++m) {
        if ((m + fridge_phase) % 45 < 20) e[static_cast<std::size_t>(m)] += 0.04;
    }
    std::vector<double> h(kMinutesPerDay, 0.0);

    if (type == 0) {  // weekday
        block(e, at(6, 30), 90, 0.30);
        block(e, at(6, 45), 3, 0.65);
        block(e, at(7, 20), 2, 0.55);
        block(e, at(17, 30), 330, 0.25);
        block(e, at(18, 0), 3, 0.65);
        block(e, at(18, 30), 45, 0.45);
        block(e, at(20, 0), 180, 0.08);
        block(e, at(20, 30), 60, 0.25);
        block(e, at(20, 40), 20, 0.30);

        block(h, at(6, 50), 10, 1.00);
        block(h, at(7, 10), 8, 0.85);
        block(h, at(7, 40), 2, 0.20);
        block(h, at(12, 15), 2, 0.15);
        block(h, at(18, 20), 3, 0.25);
        block(h, at(19, 30), 10, 0.40);
        block(h, at(21, 30), 9, 0.80);
    } else if (type == 1) {  // weekend
        block(e, at(8, 30), 120, 0.30);
        block(e, at(9, 0), 3, 0.60);
        block(e, at(10, 30), 90, 0.35);
        block(e, at(12, 0), 60, 0.55);
        block(e, at(13, 0), 300, 0.12);
        block(e, at(15, 30), 2, 0.55);
        block(e, at(18, 0), 330, 0.28);
        block(e, at(19, 0), 40, 0.50);

        block(h, at(9, 0), 12, 0.95);
        block(h, at(9, 20), 10, 0.90);
        block(h, at(10, 40), 45, 0.30);
        block(h, at(13, 10), 10, 0.35);
        block(h, at(16, 0), 2, 0.20);
        block(h, at(19, 50), 10, 0.40);
        block(h, at(20, 30), 15, 0.70);
    }
    // type 2: away, appliances on standby only

    return {std::move(e), std::move(h)};
}

RoleSchedule role_from(std::vector<std::vector<double>> profiles, const std::vector<std::size_t>& day_type,
                       Day first_day) {
    double peak = 0.0;
    for (const auto& p : profiles) peak = std::max(peak, *std::max_element(p.begin(), p.end()));
    if (peak > 0.0) {
        for (auto& p : profiles) {
            for (auto& v : p) v /= peak;
        }
    }
    RoleSchedule r;
    r.resolution  = Resolution::Min1;
    r.first_day   = first_day;
    r.profiles    = std::move(profiles);
    r.day_cluster = day_type;
    r.chosen_k    = r.profiles.size();
    return r;
}

}  // namespace

WeatherSeries synthetic_weather(const SyntheticWeatherOptions& o) {
    if (o.days == 0) {
        throw ValidationError("synthetic weather needs at least one day");
    }
    const std::size_t n = o.days * kMinutesPerDay;
    WeatherSeries w(o.site, o.start, Resolution::Min1, n);
    std::mt19937_64 rng(derive_seed(o.seed, 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> cloud_by_day(o.days + 1);
    for (auto& c : cloud_by_day) c = 0.25 + 0.75 * unit(rng);

    Ar1 anomaly(3.0 * kMinutesPerDay, 3.0);
    Ar1 cloud_noise(90.0, 0.06);
    Ar1 pressure(2.0 * kMinutesPerDay, 800.0);
    Ar1 wind(6.0 * 60.0, 1.5);
    Ar1 veer(12.0 * 60.0, 60.0);
    double t_anom = anomaly.start(rng);
    double c_anom = cloud_noise.start(rng);
    double p_anom = pressure.start(rng);
    double w_anom = wind.start(rng);
    double d_anom = veer.start(rng);
    const double base_dir = 360.0 * unit(rng);

    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            t_anom = anomaly.next(rng);
            c_anom = cloud_noise.next(rng);
            p_anom = pressure.next(rng);
            w_anom = wind.next(rng);
            d_anom = veer.next(rng);
        }
        const auto t         = w.time_at(i);
        const double doy     = day_of_year(t) - 1 + static_cast<double>(seconds_of_day(t)) / 86400.0;
        const double solar_h = std::fmod(static_cast<double>(seconds_of_day(t)) / 3600.0 + o.site.longitude / 15.0 + 24.0, 24.0);
        const std::size_t d  = i / kMinutesPerDay;
        const double frac    = static_cast<double>(i % kMinutesPerDay) / kMinutesPerDay;
        const double clear   = std::clamp((1.0 - frac) * cloud_by_day[d] + frac * cloud_by_day[d + 1] + c_anom, 0.1, 1.0);

        const double dry = o.mean_temperature - o.annual_amplitude * std::cos(kTwoPi * (doy - 15.0) / 365.25) +
                           o.diurnal_amplitude * (0.5 + 0.5 * clear) * std::cos(kTwoPi * (solar_h - 15.0) / 24.0) +
                           t_anom;
        const double dew = dry - (1.0 + 7.0 * clear);
        const auto sun   = solar_geometry(o.site, t + std::chrono::seconds{30});

        w.set(WeatherField::DryBulb, i, dry);
        w.set(WeatherField::DewPoint, i, dew);
        w.set(WeatherField::RelHumidity, i, magnus_rh(dry, dew));
        w.set(WeatherField::Pressure, i, 96500.0 + p_anom);
        w.set(WeatherField::WindSpeed, i, std::max(0.0, 2.5 + w_anom));
        w.set(WeatherField::WindDir, i, std::fmod(base_dir + d_anom + 720.0, 360.0));
        w.set(WeatherField::Ghi, i, sun.extraterrestrial_horizontal * 0.78 * clear);
    }
    return w;
}

WeatherSeries perturbed_weather(const WeatherSeries& w, std::uint64_t seed) {
    WeatherSeries out(w.site(), w.start(), w.resolution(), w.size());
    std::mt19937_64 rng(derive_seed(seed, 2));
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double dry = w.get(WeatherField::DryBulb, i) + 0.3 * z(rng);
        const double dew = std::min(w.get(WeatherField::DewPoint, i) + 0.3 * z(rng), dry);
        out.set(WeatherField::DryBulb, i, dry);
        out.set(WeatherField::DewPoint, i, dew);
        out.set(WeatherField::RelHumidity, i, magnus_rh(dry, dew));
        out.set(WeatherField::Pressure, i, w.get(WeatherField::Pressure, i) + 50.0 * z(rng));
        out.set(WeatherField::WindSpeed, i, std::max(0.0, w.get(WeatherField::WindSpeed, i) * (1.0 + 0.1 * z(rng))));
        out.set(WeatherField::WindDir, i, std::fmod(w.get(WeatherField::WindDir, i) + 10.0 * z(rng) + 360.0, 360.0));
        out.set(WeatherField::Ghi, i, std::max(0.0, w.get(WeatherField::Ghi, i) * (1.0 + 0.05 * z(rng))));
    }
    return out;
}

void inject_weather_gaps(WeatherSeries& w, std::span<const GapSpec> gaps, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 3));
    const std::size_t n  = w.size();
    const auto step      = step_seconds(w.resolution());
    std::vector<bool> reserved(n, false);
    for (const auto& gap : gaps) {
        const auto len = static_cast<std::size_t>(gap.duration_seconds / step);
        if (len == 0 || len + 2 >= n) {
            throw ValidationError("weather gap does not fit the series");
        }
        std::uniform_int_distribution<std::size_t> pos(1, n - len - 1);
        for (std::size_t g = 0; g < gap.count; ++g) {
            bool placed = false;
            for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
                const auto first = pos(rng);
                bool clear       = true;
                for (std::size_t i = first - 1; i <= first + len && clear; ++i) clear = !reserved[i];
                if (!clear) continue;
                for (std::size_t i = first - 1; i <= first + len; ++i) reserved[i] = true;
                for (std::size_t i = first; i < first + len; ++i) {
                    for (const auto f : kAllWeatherFields) w.set_missing(f, i);
                }
                placed = true;
            }
            if (!placed) {
                throw ValidationError("could not place all weather gaps without overlap");
            }
        }
    }
}

ScheduleSet truth_schedules(const TruthScheduleOptions& o) {
    if (o.days == 0) {
        throw ValidationError("truth schedules need at least one day");
    }
    std::mt19937_64 rng(derive_seed(o.seed, 4));
    std::vector<DayTemplates> templates;
    for (int type = 0; type < 3; ++type) templates.push_back(make_templates(type, rng));

    std::vector<std::size_t> day_type(o.days);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t away = 0;
    for (std::size_t d = 0; d < o.days; ++d) {
        const std::chrono::weekday wd{o.first_day + std::chrono::days{static_cast<int>(d)}};
        day_type[d] = (wd == std::chrono::Saturday || wd == std::chrono::Sunday) ? 1 : 0;
        if (unit(rng) < o.away_fraction) {
            day_type[d] = 2;
            ++away;
        }
    }
    // keep the away type represented by at least two days on longer records
    std::uniform_int_distribution<std::size_t> pick(0, o.days - 1);
    while (o.away_fraction > 0.0 && o.days >= 14 && away < 2) {
        const auto d = pick(rng);
        if (day_type[d] != 2) {
            day_type[d] = 2;
            ++away;
        }
    }

    std::vector<std::vector<double>> elec, dhw;
    for (auto& t : templates) {
        elec.push_back(t.electricity);
        dhw.push_back(t.dhw);
    }
    ScheduleSet set;
    set.resolution = Resolution::Min1;
    const auto shared = role_from(elec, day_type, o.first_day);
    set.roles[ScheduleRole::Occupancy]    = shared;
    set.roles[ScheduleRole::Lighting]     = shared;
    set.roles[ScheduleRole::Appliances]   = shared;
    set.roles[ScheduleRole::DHW]          = role_from(dhw, day_type, o.first_day);
    set.roles[ScheduleRole::Infiltration] = constant_schedule();
    return set;
}

ParameterVector reference_parameters() {
    ParameterVector p;
    p.values.resize(kParamCount);
    p[Param::OccupantGain]             = 1.0;
    p[Param::ApplianceDensity]         = 28.0;
    p[Param::LightingDensity]          = 3.5;
    p[Param::ApplianceRadiantFraction] = 30.0;
    p[Param::LightingRadiantFraction]  = 45.0;
    p[Param::VentilationRate]          = 5.5e-4;
    p[Param::InfiltrationRate]         = 6.0e-5;
    p[Param::HeatingSetpoint]          = 21.0;
    p[Param::CoolingSetpoint]          = 25.0;
    p[Param::GlassDirtFactor]          = 0.7;
    p[Param::WallInsulation]           = 0.08;
    p[Param::FloorCeilingInsulation]   = 0.3;
    p[Param::WindowInsulation]         = 1.0e-3;
    p[Param::DhwPeakFlow]              = 4.5e-5;
    return p;
}

}  // namespace bemcal
