#include "bemcal/weather.hpp"

#include "bemcal/csv.hpp"
#include "bemcal/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace bemcal {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

std::string_view name(WeatherField f) {
    switch (f) {
        case WeatherField::DryBulb: return "dry_bulb";
        case WeatherField::DewPoint: return "dew_point";
        case WeatherField::RelHumidity: return "rh";
        case WeatherField::Pressure: return "pressure";
        case WeatherField::WindSpeed: return "wind_speed";
        case WeatherField::WindDir: return "wind_dir";
        case WeatherField::Ghi: return "ghi";
    }
    return "?";
}

WeatherSeries::WeatherSeries(Site site, Timestamp start, Resolution resolution, std::size_t steps)
    : site_(site), start_(start), resolution_(resolution), size_(steps) {
    if (is_calendar(resolution) || coarser_than(resolution, Resolution::Hourly)) {
        throw ValidationError(fmt::format("weather series resolution {} is coarser than hourly", name(resolution)));
    }
    for (std::size_t f = 0; f < kWeatherFieldCount; ++f) {
        values_[f].assign(steps, 0.0);
        missing_[f].assign(steps, false);
        filled_[f].assign(steps, false);
    }
}

Timestamp WeatherSeries::time_at(std::size_t i) const {
    return start_ + std::chrono::seconds{step_seconds(resolution_) * static_cast<std::int64_t>(i)};
}

void WeatherSeries::set(WeatherField f, std::size_t i, double v) {
    values_[index(f)][i]  = v;
    missing_[index(f)][i] = false;
}

void WeatherSeries::set_missing(WeatherField f, std::size_t i) {
    values_[index(f)][i]  = std::numeric_limits<double>::quiet_NaN();
    missing_[index(f)][i] = true;
}

std::size_t WeatherSeries::missing_count() const {
    std::size_t n = 0;
    for (const auto& m : missing_) {
        n += static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
    }
    return n;
}

void WeatherSeries::validate() const {
    for (std::size_t i = 0; i < size_; ++i) {
        if (!is_missing(WeatherField::Ghi, i) && get(WeatherField::Ghi, i) < 0.0) {
            throw ValidationError(fmt::format("negative ghi at {}", format_timestamp(time_at(i))));
        }
        if (!is_missing(WeatherField::RelHumidity, i)) {
            const double rh = get(WeatherField::RelHumidity, i);
            if (rh < 0.0 || rh > 100.0) {
                throw ValidationError(fmt::format("relative humidity {} out of [0, 100] at {}", rh,
                                                  format_timestamp(time_at(i))));
            }
        }
    }
}

SolarPosition solar_geometry(const Site& site, Timestamp t) {
    const double n     = day_of_year(t);
    const double gamma = 2.0 * std::numbers::pi * (n - 1.0) / 365.0;
    const double decl  = 23.45 * kDeg * std::sin(2.0 * std::numbers::pi * (284.0 + n) / 365.0);
    const double e0    = 1.000110 + 0.034221 * std::cos(gamma) + 0.001280 * std::sin(gamma) +
                      0.000719 * std::cos(2.0 * gamma) + 0.000077 * std::sin(2.0 * gamma);
    const double eot = 229.18 * (0.000075 + 0.001868 * std::cos(gamma) - 0.032077 * std::sin(gamma) -
                                 0.014615 * std::cos(2.0 * gamma) - 0.04089 * std::sin(2.0 * gamma));
    const double utc_hours  = static_cast<double>(seconds_of_day(t)) / 3600.0;
    const double solar_time = utc_hours + site.longitude / 15.0 + eot / 60.0;
    const double omega      = 15.0 * kDeg * (solar_time - 12.0);
    const double lat        = site.latitude * kDeg;
    double cz = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(omega);
    cz        = std::clamp(cz, 0.0, 1.0);
    return {cz, kSolarConstant * e0 * cz};
}

double reindl_diffuse_fraction(double kt) {
    if (kt <= 0.3) {
        return 1.020 - 0.248 * kt;
    }
    if (kt < 0.78) {
        return 1.45 - 1.67 * kt;
    }
    return 0.147;
}

SolarSplit reindl_split(double ghi, double zenith_cosine, double extraterrestrial_horizontal) {
    if (!(ghi > 0.0)) {
        return {};
    }
    const double kt = extraterrestrial_horizontal > 0.0 ? ghi / extraterrestrial_horizontal : 0.0;
    const double fd = std::clamp(reindl_diffuse_fraction(kt), 0.147, 1.0);
    SolarSplit s;
    if (zenith_cosine < 0.01) {
        s.dhi = ghi;
        return s;
    }
    s.dhi = fd * ghi;
    s.dni = (ghi - s.dhi) / zenith_cosine;
    const double beam_cap = extraterrestrial_horizontal / zenith_cosine;
    if (s.dni > beam_cap) {
        s.dni = beam_cap;
        s.dhi = ghi - beam_cap * zenith_cosine;
    }
    return s;
}

std::vector<SolarSplit> split_irradiance(const WeatherSeries& w) {
    std::vector<SolarSplit> out(w.size());
    const auto half = std::chrono::seconds{step_seconds(w.resolution()) / 2};
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.is_missing(WeatherField::Ghi, i)) {
            continue;
        }
        const auto sun = solar_geometry(w.site(), w.time_at(i) + half);
        out[i]         = reindl_split(w.get(WeatherField::Ghi, i), sun.zenith_cosine, sun.extraterrestrial_horizontal);
    }
    return out;
}

WeatherSeries infill_weather(const WeatherSeries& primary, const WeatherSeries& secondary) {
    if (primary.resolution() != secondary.resolution()) {
        throw ValidationError(fmt::format("weather sources differ in resolution ({} vs {})",
                                          name(primary.resolution()), name(secondary.resolution())));
    }
    const auto step  = step_seconds(primary.resolution());
    const auto shift = epoch_seconds(primary.start()) - epoch_seconds(secondary.start());
    if (shift % step != 0) {
        throw ValidationError("weather sources are not on the same time grid");
    }
    WeatherSeries out = primary;
    for (std::size_t i = 0; i < primary.size(); ++i) {
        const auto j     = shift / step + static_cast<std::int64_t>(i);
        const bool in_sec = j >= 0 && j < static_cast<std::int64_t>(secondary.size());
        for (const auto f : kAllWeatherFields) {
            if (!primary.is_missing(f, i)) {
                continue;
            }
            if (!in_sec || secondary.is_missing(f, static_cast<std::size_t>(j))) {
                throw ValidationError(fmt::format("weather field {} missing in both sources at {}", name(f),
                                                  format_timestamp(primary.time_at(i))));
            }
            out.set(f, i, secondary.get(f, static_cast<std::size_t>(j)));
            out.mark_filled(f, i);
        }
    }
    return out;
}

WeatherSeries resample_weather(const WeatherSeries& w, Resolution target) {
    if (is_calendar(target) || coarser_than(target, Resolution::Hourly)) {
        throw ValidationError("simulation weather capped at hourly");
    }
    if (finer_than(target, w.resolution())) {
        throw ValidationError(fmt::format("cannot resample {} weather to finer {}", name(w.resolution()),
                                          name(target)));
    }
    if (target == w.resolution()) {
        return w;
    }
    if (!is_aligned(w.start(), target)) {
        throw ValidationError(fmt::format("weather start {} is not aligned to {}", format_timestamp(w.start()),
                                          name(target)));
    }
    const auto factor = static_cast<std::size_t>(step_seconds(target) / step_seconds(w.resolution()));
    if (w.size() % factor != 0) {
        throw ValidationError("weather series does not cover a whole number of target steps");
    }
    WeatherSeries out(w.site(), w.start(), target, w.size() / factor);
    for (std::size_t o = 0; o < out.size(); ++o) {
        const std::size_t first = o * factor;
        for (const auto f : kAllWeatherFields) {
            bool gap = false;
            double sum = 0.0, sx = 0.0, sy = 0.0;
            for (std::size_t i = first; i < first + factor; ++i) {
                if (w.is_missing(f, i)) {
                    gap = true;
                    break;
                }
                const double v = w.get(f, i);
                if (f == WeatherField::WindDir) {
                    sx += std::sin(v * kDeg);
                    sy += std::cos(v * kDeg);
                } else {
                    sum += v;
                }
            }
            if (gap) {
                out.set_missing(f, o);
                continue;
            }
            if (f == WeatherField::WindDir) {
                double deg = std::atan2(sx, sy) / kDeg;
                if (deg < 0.0) deg += 360.0;
                out.set(f, o, deg);
            } else {
                out.set(f, o, sum / static_cast<double>(factor));
            }
        }
    }
    return out;
}

WeatherSeries slice(const WeatherSeries& w, Timestamp from, Timestamp to) {
    const auto step = step_seconds(w.resolution());
    const auto a    = std::max<std::int64_t>(0, (epoch_seconds(from) - epoch_seconds(w.start())) / step);
    const auto b    = std::min<std::int64_t>(static_cast<std::int64_t>(w.size()),
                                          (epoch_seconds(to) - epoch_seconds(w.start())) / step);
    if (b <= a) {
        throw ValidationError("empty weather slice");
    }
    WeatherSeries out(w.site(), w.time_at(static_cast<std::size_t>(a)), w.resolution(),
                      static_cast<std::size_t>(b - a));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto src = static_cast<std::size_t>(a) + i;
        for (const auto f : kAllWeatherFields) {
            if (w.is_missing(f, src)) {
                out.set_missing(f, i);
            } else {
                out.set(f, i, w.get(f, src));
            }
            if (w.is_filled(f, src)) {
                out.mark_filled(f, i);
            }
        }
    }
    return out;
}

namespace csv {

WeatherSeries load_weather(const std::filesystem::path& path, const Site& site) {
    const auto lines = read_lines(path);
    const auto file  = path.string();
    if (lines.empty()) {
        throw ValidationError(fmt::format("{}: empty weather file", file));
    }
    const auto header = split(lines.front());
    const std::array<std::string_view, 8> expected{"timestamp", "dry_bulb",   "dew_point", "rh",
                                                   "pressure",  "wind_speed", "wind_dir",  "ghi"};
    if (header.size() < expected.size() || !std::equal(expected.begin(), expected.end(), header.begin())) {
        throw ValidationError(fmt::format(
            "{}:1: expected header 'timestamp,dry_bulb,dew_point,rh,pressure,wind_speed,wind_dir,ghi'", file));
    }
    std::vector<Timestamp> times;
    std::vector<std::array<std::optional<double>, kWeatherFieldCount>> rows;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) {
            continue;
        }
        const auto where  = fmt::format("{}:{}", file, ln + 1);
        const auto fields = split(lines[ln]);
        if (fields.size() < expected.size()) {
            throw ValidationError(fmt::format("{}: expected at least {} fields, got {}", where, expected.size(),
                                              fields.size()));
        }
        Timestamp t;
        try {
            t = parse_timestamp(fields[0]);
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("{}: {}", where, e.what()));
        }
        if (times.size() >= 2) {
            const auto d0 = epoch_seconds(times[1]) - epoch_seconds(times[0]);
            if (epoch_seconds(t) - epoch_seconds(times.back()) != d0) {
                throw ValidationError(fmt::format("{}: non-uniform interval", where));
            }
        } else if (times.size() == 1 && t <= times.back()) {
            throw ValidationError(fmt::format("{}: timestamps must increase", where));
        }
        times.push_back(t);
        auto& row = rows.emplace_back();
        for (std::size_t f = 0; f < kWeatherFieldCount; ++f) {
            row[f] = parse_number(fields[f + 1], where);
        }
    }
    if (times.size() < 2) {
        throw ValidationError(fmt::format("{}: need at least two rows to infer the interval", file));
    }
    Resolution res;
    try {
        res = resolution_from_step(epoch_seconds(times[1]) - epoch_seconds(times[0]));
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", file, e.what()));
    }
    WeatherSeries w(site, times.front(), res, times.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto f : kAllWeatherFields) {
            if (rows[i][index(f)]) {
                w.set(f, i, *rows[i][index(f)]);
            } else {
                w.set_missing(f, i);
            }
        }
    }
    w.validate();
    return w;
}

void write_weather(const std::filesystem::path& path, const WeatherSeries& w) {
    const auto split = split_irradiance(w);
    std::string out  = "timestamp,dry_bulb,dew_point,rh,pressure,wind_speed,wind_dir,ghi,dhi,dni\n";
    out.reserve(w.size() * 96);
    for (std::size_t i = 0; i < w.size(); ++i) {
        out += format_timestamp(w.time_at(i));
        for (const auto f : kAllWeatherFields) {
            out += ',';
            if (!w.is_missing(f, i)) {
                out += format_number(w.get(f, i));
            }
        }
        out += ',';
        out += format_number(split[i].dhi);
        out += ',';
        out += format_number(split[i].dni);
        out += '\n';
    }
    write_text(path, out);
}

}  // namespace csv

}  // namespace bemcal
