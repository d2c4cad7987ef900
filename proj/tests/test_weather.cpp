#include "bemcal/error.hpp"
#include "bemcal/weather.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace bemcal;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

WeatherSeries constant_weather(Resolution r, std::size_t n, double dry, double ghi) {
    WeatherSeries w(Site{}, parse_timestamp("2023-06-01T00:00:00Z"), r, n);
    for (std::size_t i = 0; i < n; ++i) {
        w.set(WeatherField::DryBulb, i, dry);
        w.set(WeatherField::DewPoint, i, dry - 5.0);
        w.set(WeatherField::RelHumidity, i, 70.0);
        w.set(WeatherField::Pressure, i, 96000.0);
        w.set(WeatherField::WindSpeed, i, 2.0);
        w.set(WeatherField::WindDir, i, 180.0);
        w.set(WeatherField::Ghi, i, ghi);
    }
    return w;
}

}  // namespace

TEST(SolarGeometry, NightIsZero) {
    const auto sun = solar_geometry(Site{47.4, 8.6}, parse_timestamp("2023-01-15T00:00:00Z"));
    EXPECT_EQ(sun.zenith_cosine, 0.0);
    EXPECT_EQ(sun.extraterrestrial_horizontal, 0.0);
}

TEST(SolarGeometry, DailyMaximumMatchesDeclination) {
    // max over the day of cos z is cos(lat - decl) at solar noon
    const auto best_cos = [](Site site, const char* day) {
        const auto t0 = parse_timestamp(day);
        double best   = 0.0;
        for (int m = 0; m < 1440; ++m) best = std::max(best, solar_geometry(site, t0 + std::chrono::minutes{m}).zenith_cosine);
        return best;
    };
    const double decl = 23.45 * std::sin(2.0 * std::numbers::pi * (284.0 + 172.0) / 365.0);
    EXPECT_NEAR(best_cos(Site{47.4, 8.6}, "2023-06-21T00:00:00Z"), std::cos((47.4 - decl) * kDeg), 2e-4);
    EXPECT_NEAR(best_cos(Site{0.0, 0.0}, "2023-03-21T00:00:00Z"), 1.0, 1e-3);
}

TEST(Reindl, PiecewiseSpotValues) {
    EXPECT_DOUBLE_EQ(reindl_diffuse_fraction(0.2), 1.020 - 0.248 * 0.2);
    EXPECT_NEAR(reindl_diffuse_fraction(0.2), 0.9704, 1e-12);
    EXPECT_DOUBLE_EQ(reindl_diffuse_fraction(0.5), 1.45 - 1.67 * 0.5);
    EXPECT_DOUBLE_EQ(reindl_diffuse_fraction(0.9), 0.147);
}

TEST(Reindl, SplitExamples) {
    const auto zero = reindl_split(0.0, 0.5, 600.0);
    EXPECT_EQ(zero.dhi, 0.0);
    EXPECT_EQ(zero.dni, 0.0);

    const auto low = reindl_split(100.0, 0.5, 100.0 / 0.2);
    EXPECT_NEAR(low.dhi, 97.04, 1e-9);
    EXPECT_NEAR(low.dni, 5.92, 1e-9);

    const auto high = reindl_split(800.0, 0.8, 800.0 / 0.9);
    EXPECT_NEAR(high.dhi, 117.6, 1e-9);
    EXPECT_NEAR(high.dni, 853.0, 1e-9);
}

TEST(Reindl, PiecewiseMonotoneAndNonNegative) {
    // the correlation pieces do not meet at kt = 0.3 and 0.78
    double prev = reindl_diffuse_fraction(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double kt = i / 1000.0;
        const double fd = reindl_diffuse_fraction(kt);
        if (i != 301 && i != 781) EXPECT_LE(fd, prev + 1e-12) << kt;
        EXPECT_GE(fd, 0.0);
        prev = fd;
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double cz   = u(rng);
        const double g0h  = 1400.0 * cz * u(rng);
        const double ghi  = 1500.0 * u(rng);
        const auto split  = reindl_split(ghi, cz, g0h);
        EXPECT_GE(split.dhi, 0.0);
        EXPECT_GE(split.dni, 0.0);
    }
}

TEST(Reindl, ReconstructionIdentity) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double cz  = 0.05 + 0.95 * u(rng);
        const double g0h = 1367.0 * cz;
        const double ghi = g0h * (0.05 + 0.8 * u(rng));
        const auto s     = reindl_split(ghi, cz, g0h);
        EXPECT_NEAR(s.dhi + s.dni * cz, ghi, 1e-9 * ghi);
    }
}

TEST(WeatherInfill, FillsFromSecondaryAndFlags) {
    auto primary         = constant_weather(Resolution::Min1, 10, 20.0, 100.0);
    const auto secondary = constant_weather(Resolution::Min1, 10, 12.3, 90.0);
    const auto same      = infill_weather(primary, secondary);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(same.get(WeatherField::DryBulb, i), 20.0);

    primary.set_missing(WeatherField::DryBulb, 5);
    const auto merged = infill_weather(primary, secondary);
    EXPECT_EQ(merged.get(WeatherField::DryBulb, 5), 12.3);
    EXPECT_TRUE(merged.is_filled(WeatherField::DryBulb, 5));
    EXPECT_FALSE(merged.is_filled(WeatherField::Ghi, 5));

    auto broken = secondary;
    broken.set_missing(WeatherField::DryBulb, 5);
    try {
        infill_weather(primary, broken);
        FAIL();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("dry_bulb"), std::string::npos);
        EXPECT_NE(msg.find("2023-06-01T00:05:00Z"), std::string::npos);
    }
}

TEST(WeatherResample, MeansAndCap) {
    const auto w = constant_weather(Resolution::Min1, 120, 20.0, 0.0);
    const auto h = resample_weather(w, Resolution::Hourly);
    ASSERT_EQ(h.size(), 2u);
    EXPECT_DOUBLE_EQ(h.get(WeatherField::DryBulb, 0), 20.0);

    auto half = constant_weather(Resolution::Min30, 2, 20.0, 0.0);
    half.set(WeatherField::Ghi, 1, 100.0);
    EXPECT_DOUBLE_EQ(resample_weather(half, Resolution::Hourly).get(WeatherField::Ghi, 0), 50.0);

    try {
        resample_weather(w, Resolution::Daily);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("simulation weather capped at hourly"), std::string::npos);
    }
}

TEST(WeatherResample, WindDirectionCircularMean) {
    auto w = constant_weather(Resolution::Min30, 2, 10.0, 0.0);
    w.set(WeatherField::WindDir, 0, 350.0);
    w.set(WeatherField::WindDir, 1, 10.0);
    const double d = resample_weather(w, Resolution::Hourly).get(WeatherField::WindDir, 0);
    EXPECT_NEAR(std::min(d, 360.0 - d), 0.0, 1e-9);
}

TEST(WeatherCsv, RoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "bemcal_weather_csv";
    auto w         = constant_weather(Resolution::Min5, 12, 18.5, 250.0);
    w.set_missing(WeatherField::Pressure, 3);
    csv::write_weather(dir / "w.csv", w);
    const auto back = csv::load_weather(dir / "w.csv", Site{});
    EXPECT_EQ(back.resolution(), Resolution::Min5);
    EXPECT_TRUE(back.is_missing(WeatherField::Pressure, 3));
    EXPECT_EQ(back.get(WeatherField::DryBulb, 7), 18.5);
}
