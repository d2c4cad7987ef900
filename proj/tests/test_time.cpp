#include "bemcal/error.hpp"
#include "bemcal/resolution.hpp"
#include "bemcal/time.hpp"

#include <gtest/gtest.h>

using namespace bemcal;

TEST(Time, ParsesUtcAndOffsets) {
    const auto a = parse_timestamp("2023-03-01T12:30:00Z");
    const auto b = parse_timestamp("2023-03-01T13:30:00+01:00");
    EXPECT_EQ(a, b);
    EXPECT_EQ(format_timestamp(a), "2023-03-01T12:30:00Z");
    EXPECT_EQ(parse_timestamp("2023-03-01 12:30"), a);
    EXPECT_THROW(parse_timestamp("2023-03-01X12:30"), ValidationError);
    EXPECT_THROW(parse_timestamp("12:30"), ValidationError);
    EXPECT_THROW(parse_timestamp("2023-02-30T00:00:00Z"), ValidationError);
}

TEST(Time, CalendarHelpers) {
    const auto t = parse_timestamp("2024-02-29T23:59:00Z");
    EXPECT_EQ(day_of_year(t), 60);
    EXPECT_EQ(seconds_of_day(t), 86340);
    EXPECT_EQ(format_timestamp(month_start(t)), "2024-02-01T00:00:00Z");
    EXPECT_EQ(format_timestamp(next_month_start(t)), "2024-03-01T00:00:00Z");
    EXPECT_EQ(format_timestamp(next_month_start(parse_timestamp("2023-12-15T00:00:00Z"))), "2024-01-01T00:00:00Z");
}

TEST(Resolution, OrderAndSteps) {
    EXPECT_EQ(kAllResolutions.size(), 8u);
    for (std::size_t i = 1; i < kAllResolutions.size(); ++i) {
        EXPECT_TRUE(finer_than(kAllResolutions[i - 1], kAllResolutions[i]));
    }
    EXPECT_EQ(step_seconds(Resolution::Min15), 900);
    EXPECT_EQ(step_seconds(Resolution::Hour6), 21600);
    EXPECT_TRUE(is_calendar(Resolution::Monthly));
    EXPECT_EQ(simulation_step(Resolution::Daily), Resolution::Hourly);
    EXPECT_EQ(simulation_step(Resolution::Min5), Resolution::Min5);
}

TEST(Resolution, NamesRoundTrip) {
    for (const auto r : kAllResolutions) EXPECT_EQ(parse_resolution(name(r)), r);
    EXPECT_THROW(parse_resolution("weekly"), ValidationError);
    EXPECT_EQ(resolution_from_step(300), Resolution::Min5);
    EXPECT_THROW(resolution_from_step(120), ValidationError);
}

TEST(Resolution, AdvanceAndAlignment) {
    const auto jan31 = parse_timestamp("2023-01-31T00:00:00Z");
    EXPECT_FALSE(is_aligned(jan31, Resolution::Monthly));
    EXPECT_TRUE(is_aligned(parse_timestamp("2023-02-01T00:00:00Z"), Resolution::Monthly));
    EXPECT_EQ(format_timestamp(advance(parse_timestamp("2023-02-01T00:00:00Z"), Resolution::Monthly)),
              "2023-03-01T00:00:00Z");
    EXPECT_TRUE(is_aligned(parse_timestamp("2023-02-01T06:00:00Z"), Resolution::Hour6));
    EXPECT_FALSE(is_aligned(parse_timestamp("2023-02-01T06:05:00Z"), Resolution::Min15));
}
