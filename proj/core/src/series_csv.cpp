#include "bemcal/csv.hpp"

#include "bemcal/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace bemcal::csv {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

std::optional<double> parse_number(std::string_view field, std::string_view where) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (field.empty()) {
        return std::nullopt;
    }
    double v        = 0.0;
    const auto* end = field.data() + field.size();
    const auto res  = std::from_chars(field.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ValidationError(fmt::format("{}: '{}' is not a number", where, field));
    }
    return v;
}

std::string format_number(double v) { return fmt::format("{}", v); }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open {}", path.string()));
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

MeteredSeries load_series(const std::filesystem::path& path, Channel channel) {
    const auto lines = read_lines(path);
    const auto file  = path.string();
    if (lines.empty() || lines.front() != "timestamp,value") {
        throw ValidationError(fmt::format("{}:1: expected header 'timestamp,value'", file));
    }
    std::vector<Timestamp> times;
    std::vector<double> values;
    std::vector<bool> missing;
    std::vector<std::size_t> row_line;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) {
            continue;
        }
        const auto where  = fmt::format("{}:{}", file, ln + 1);
        const auto fields = split(lines[ln]);
        if (fields.size() != 2) {
            throw ValidationError(fmt::format("{}: expected 2 fields, got {}", where, fields.size()));
        }
        Timestamp t;
        try {
            t = parse_timestamp(fields[0]);
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("{}: {}", where, e.what()));
        }
        const auto v = parse_number(fields[1], where);
        row_line.push_back(ln + 1);
        if (v && *v < 0.0) {
            throw ValidationError(fmt::format("{}: negative energy {}", where, *v));
        }
        times.push_back(t);
        values.push_back(v.value_or(0.0));
        missing.push_back(!v.has_value());
    }
    if (times.size() < 2) {
        throw ValidationError(fmt::format("{}: need at least two rows to infer the interval", file));
    }
    const bool monthly = times[0] == month_start(times[0]) && times[1] == next_month_start(times[0]);
    const auto d0      = epoch_seconds(times[1]) - epoch_seconds(times[0]);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const bool ok = monthly ? times[i] == next_month_start(times[i - 1])
                                : epoch_seconds(times[i]) - epoch_seconds(times[i - 1]) == d0;
        if (!ok) {
            throw ValidationError(fmt::format("{}:{}: non-uniform interval ({} s, expected {})", file,
                                              row_line[i], epoch_seconds(times[i]) - epoch_seconds(times[i - 1]),
                                              monthly ? std::string("one calendar month") : fmt::format("{} s", d0)));
        }
    }
    Resolution res = Resolution::Monthly;
    if (!monthly) {
        try {
            res = resolution_from_step(d0);
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("{}: {}", file, e.what()));
        }
    }
    return {channel, times.front(), res, std::move(values), std::move(missing)};
}

void write_series(const std::filesystem::path& path, const MeteredSeries& series) {
    std::string out = "timestamp,value\n";
    out.reserve(series.size() * 32);
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_timestamp(series.time_at(i));
        out += ',';
        if (!series.is_missing(i)) {
            out += format_number(series.value(i));
        }
        out += '\n';
    }
    write_text(path, out);
}

}  // namespace bemcal::csv
