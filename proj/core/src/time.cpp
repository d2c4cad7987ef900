#include "bemcal/time.hpp"

#include "bemcal/error.hpp"

#include <charconv>

#include <fmt/format.h>

namespace bemcal {

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len) {
    if (pos + len > text.size()) {
        throw ValidationError(fmt::format("truncated timestamp '{}'", text));
    }
    int value       = 0;
    const auto* beg = text.data() + pos;
    const auto res  = std::from_chars(beg, beg + len, value);
    if (res.ec != std::errc{} || res.ptr != beg + len) {
        throw ValidationError(fmt::format("malformed timestamp '{}'", text));
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed) {
    if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
        throw ValidationError(fmt::format("malformed timestamp '{}'", text));
    }
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    const int y = parse_field(text, 0, 4);
    expect_char(text, 4, "-");
    const int mo = parse_field(text, 5, 2);
    expect_char(text, 7, "-");
    const int d = parse_field(text, 8, 2);
    expect_char(text, 10, "T ");
    const int h = parse_field(text, 11, 2);
    expect_char(text, 13, ":");
    const int mi   = parse_field(text, 14, 2);
    std::size_t at = 16;
    int s          = 0;
    if (at < text.size() && text[at] == ':') {
        s = parse_field(text, at + 1, 2);
        at += 3;
    }
    std::int64_t offset = 0;
    if (at < text.size()) {
        if (text[at] == 'Z') {
            ++at;
        } else if (text[at] == '+' || text[at] == '-') {
            const int sign = text[at] == '+' ? 1 : -1;
            const int oh   = parse_field(text, at + 1, 2);
            expect_char(text, at + 3, ":");
            const int om = parse_field(text, at + 4, 2);
            offset       = sign * (oh * 3600 + om * 60);
            at += 6;
        }
    }
    if (at != text.size()) {
        throw ValidationError(fmt::format("trailing characters in timestamp '{}'", text));
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw ValidationError(fmt::format("invalid calendar value in timestamp '{}'", text));
    }
    const auto t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - seconds{offset};
    return time_point_cast<seconds>(t);
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto dp = floor<days>(t);
    const year_month_day ymd{dp};
    const hh_mm_ss hms{t - dp};
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                       hms.minutes().count(), hms.seconds().count());
}

std::string format_day(Day d) {
    using namespace std::chrono;
    const year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

int day_of_year(Timestamp t) {
    using namespace std::chrono;
    const auto dp = floor<days>(t);
    const year_month_day ymd{dp};
    const sys_days jan1{ymd.year() / January / 1};
    return static_cast<int>((dp - jan1).count()) + 1;
}

Timestamp month_start(Timestamp t) {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(t)};
    return Timestamp{sys_days{ymd.year() / ymd.month() / 1}};
}

Timestamp next_month_start(Timestamp t) {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(t)};
    const year_month next = year_month{ymd.year(), ymd.month()} + months{1};
    return Timestamp{sys_days{next / 1}};
}

}  // namespace bemcal
