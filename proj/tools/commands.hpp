#pragma once

#include "config.hpp"

#include "bemcal/engine.hpp"
#include "bemcal/pipeline.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace bemcal::cli {

struct SyntheticDataset {
    std::array<MeteredSeries, 4> measurements;  ///< 1-minute ground truth with noise and gaps
    WeatherSeries primary;                      ///< with gaps
    WeatherSeries secondary;
    ScheduleSet schedules;                      ///< truth schedules
    ParameterVector true_parameters;
};

/// Builds the synthetic dataset described by the `synth` block; noise and
/// gap positions follow the run seed, everything else the signal seed.
SyntheticDataset synthesize(const RunConfig& config);

struct CalibrationRun {
    std::vector<CalibrationResult> results;       ///< finest first
    std::vector<const ScheduleSet*> schedules;    ///< parallel to results, owned by the bundle
    ResolutionMatrix matrix;
    std::vector<PriorSummary> priors;
    std::map<Resolution, std::string> failures;
};

/// Calibrates every requested resolution present in the bundle, isolating
/// failures per resolution, then cross-evaluates at 1-minute steps.
CalibrationRun run_calibration(const PreparedBundle& bundle, const RunConfig& config);

/// Writes the CSV artifacts of a run and returns their paths.
std::vector<std::filesystem::path> write_run(const CalibrationRun& run, const RunConfig& config);

/// Subcommands. Each returns the process exit code for a run that did not
/// throw; ValidationError maps to 1 and other exceptions to 2 in main.
int cmd_synth(const RunConfig& config);
int cmd_prepare(const RunConfig& config);
int cmd_calibrate(const RunConfig& config);
int cmd_report(const RunConfig& config);

}  // namespace bemcal::cli
