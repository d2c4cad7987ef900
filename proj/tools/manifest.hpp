#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

namespace bemcal::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// {"path relative to base": "sha256", ...} in the given order.
nlohmann::ordered_json digest_map(std::span<const std::filesystem::path> files, const std::filesystem::path& base);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

}  // namespace bemcal::cli
