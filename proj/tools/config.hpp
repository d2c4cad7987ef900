#pragma once

#include "bemcal/engine.hpp"
#include "bemcal/pipeline.hpp"
#include "bemcal/simulator.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bemcal::cli {

struct SynthConfig {
    Timestamp start{};
    std::size_t days{365};
    double noise{0.05};
    std::vector<GapSpec> gaps;
    std::vector<GapSpec> weather_gaps;
    std::uint64_t signal_seed{11};
    double away_fraction{0.1};
    ParameterVector true_parameters;
    double mean_temperature{9.5};
    double annual_amplitude{9.0};
    double diurnal_amplitude{4.0};
};

struct RunConfig {
    std::filesystem::path source;  ///< config file; relative paths resolve against its directory
    Site site{};
    std::array<std::filesystem::path, 4> measurements;
    std::filesystem::path weather_primary;
    std::filesystem::path weather_secondary;
    std::filesystem::path bundle;
    std::filesystem::path output;
    BuildingSpec building{};
    ParameterSpace space = ParameterSpace::building_defaults();
    EngineConfig engine{};
    std::uint64_t seed{1};
    std::vector<Resolution> resolutions{kAllResolutions.begin(), kAllResolutions.end()};
    PrepareOptions prepare{};
    SynthConfig synth{};
    nlohmann::ordered_json effective;  ///< the config as applied, for the manifest
};

/// Command line values that take precedence over the file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> resolutions;  ///< comma separated
    std::optional<std::size_t> jobs;
    std::optional<std::filesystem::path> out;
};

std::vector<Resolution> parse_resolution_list(std::string_view text);

/// Reads and validates a JSON run configuration. Throws ValidationError with
/// the offending key on bad input.
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

}  // namespace bemcal::cli
