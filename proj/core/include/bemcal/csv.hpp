#pragma once

#include "bemcal/series.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bemcal::csv {

/// Splits one line on commas (no quoting; the formats here never quote).
std::vector<std::string_view> split(std::string_view line);

/// Empty field -> nullopt. Throws ValidationError naming `where` otherwise.
std::optional<double> parse_number(std::string_view field, std::string_view where);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

/// Reads all lines, stripping trailing '\r'.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes `text` atomically enough for our purposes (truncate + write).
void write_text(const std::filesystem::path& path, std::string_view text);

/// Loads a `timestamp,value` energy CSV. Empty value = missing. The interval
/// must be uniform and match one of the fixed resolutions.
MeteredSeries load_series(const std::filesystem::path& path, Channel channel);

/// Writes a `timestamp,value` energy CSV (missing -> empty field).
void write_series(const std::filesystem::path& path, const MeteredSeries& series);

}  // namespace bemcal::csv
