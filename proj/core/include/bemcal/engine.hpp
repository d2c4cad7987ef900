#pragma once

#include "bemcal/metrics.hpp"
#include "bemcal/mixture.hpp"
#include "bemcal/parameters.hpp"
#include "bemcal/simulator.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bemcal {

struct EngineConfig {
    std::size_t m{200};                ///< samples per iteration
    std::optional<std::size_t> k;      ///< elite count, defaults to ceil(0.1 m)
    Thresholds thresholds{};
    double improvement_tol{0.01};
    std::size_t max_iterations{50};
    std::size_t batch_size{30};        ///< simulations run concurrently per wave
    std::uint64_t seed{0};
    FitOptions mixture{};              ///< seed field is ignored; derived per iteration

    std::size_t elite_count() const;

    /// Throws ValidationError unless 1 <= k <= m, m >= 2, improvement_tol > 0
    /// and batch_size >= 1.
    void validate() const;
};

/// Measurements and drivers for one calibration resolution.
struct CalibrationProblem {
    Resolution resolution{Resolution::Hourly};
    std::vector<MeteredSeries> measurements;  ///< calibrated channels only, at `resolution`
    SimulationContext context;                ///< at the simulation step of `resolution`
};

/// Keeps the channels with a non-zero observed total. The weather must be at
/// the simulation step of `resolution` (the resolution itself, capped at hourly).
CalibrationProblem make_problem(Resolution resolution, std::span<const MeteredSeries> measurements,
                                const WeatherSeries& weather, const ScheduleSet& schedules);

/// Simulates once, aggregates when the resolution is coarser than the
/// simulation step, and scores every calibrated channel.
FitReport evaluate(const Simulator& simulator, const CalibrationProblem& problem, const ParameterVector& params);

struct BatchOutcome {
    std::vector<std::optional<FitReport>> reports;  ///< input order; empty where the run failed
    std::vector<std::string> errors;                ///< one message per failed run
    std::size_t failures() const { return errors.size(); }
};

/// Runs the vectors in waves of `batch_size` concurrent simulations. Results
/// follow input order and do not depend on `batch_size`. Throws
/// SimulationError only when every run fails.
BatchOutcome evaluate_batch(std::span<const ParameterVector> vectors, const Simulator& simulator,
                            const CalibrationProblem& problem, std::size_t batch_size);

enum class StopReason : std::uint8_t { ThresholdMet, Converged, MaxIterations };

std::string_view name(StopReason r);

/// Per-channel minima over one batch.
struct Theta {
    std::array<std::optional<double>, 4> cvrmse{};
    std::array<std::optional<double>, 4> nmbe{};  ///< smallest |NMBE|
};

struct IterationRecord {
    std::size_t iteration{0};                  ///< 0 is the Latin hypercube batch
    Theta theta;
    double best_score{0.0};                    ///< best-so-far score after this batch
    std::vector<ParameterVector> elites;       ///< k lowest-distance samples of the batch
    std::optional<MixtureModel> proposal;      ///< mixture the batch was drawn from
    std::size_t failures{0};
};

struct CalibrationResult {
    Resolution resolution{Resolution::Hourly};
    std::vector<IterationRecord> iterations;
    ParameterVector best;
    FitReport best_fit;
    double best_score{0.0};
    StopReason stop{StopReason::MaxIterations};
    std::size_t simulations{0};
    std::size_t simulated_steps{0};
    double wall_seconds{0.0};

    const std::vector<ParameterVector>& final_elites() const { return iterations.back().elites; }
};

/// Subset simulation: Latin hypercube seed batch, then repeatedly fit a
/// truncated Gaussian mixture to the elites and resample, carrying the best
/// vector forward. Stops when a sample meets every threshold, when no
/// per-channel minimum improves by more than `improvement_tol` (relative), or
/// after `max_iterations` resampling rounds.
///
/// The best vector is ranked by its violations scaled with the per-component
/// maxima of the seed batch, which keeps scores comparable across batches.
CalibrationResult calibrate(const Simulator& simulator, const CalibrationProblem& problem,
                            const ParameterSpace& space, const EngineConfig& config);

/// One row of the resolution comparison.
struct ResolutionRow {
    Resolution resolution{Resolution::Hourly};
    FitReport in_resolution;  ///< fit against the measurements used for calibration
    FitReport at_min1;        ///< best vector re-simulated at 1-minute steps
    std::size_t iterations{0};
    std::size_t simulations{0};
    std::size_t simulated_steps{0};
    StopReason stop{StopReason::MaxIterations};
    double wall_seconds{0.0};
};

struct ResolutionMatrix {
    std::vector<ResolutionRow> rows;  ///< finest first
};

/// Inputs for re-evaluating one calibration at 1-minute steps.
struct CrossInput {
    const CalibrationResult* result{nullptr};
    const ScheduleSet* schedules{nullptr};  ///< schedules the calibration used
};

/// Re-simulates each best vector at 1-minute steps, holding that resolution's
/// schedules, and scores it against the 1-minute measurements.
ResolutionMatrix cross_evaluate(std::span<const CrossInput> inputs, std::span<const MeteredSeries> min1_measurements,
                                const WeatherSeries& min1_weather, const Simulator& simulator);

struct PriorSummary {
    Resolution resolution{Resolution::Hourly};
    std::string variable;
    double mean{0.0};
    double sd{0.0};   ///< sample standard deviation
    double p05{0.0};  ///< linear-interpolation percentiles
    double p95{0.0};
};

/// Elite-set statistics per resolution and variable.
std::vector<PriorSummary> prior_report(std::span<const CalibrationResult> results, const ParameterSpace& space);

/// Percentile (0..100) by linear interpolation between order statistics.
double percentile(std::vector<double> values, double pct);

}  // namespace bemcal
