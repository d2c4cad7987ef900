#pragma once

#include "bemcal/engine.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bemcal {

/// `resolution,channel,cvrmse,nmbe,n_points` for the in-resolution fits.
std::string table4_csv(const ResolutionMatrix& matrix);

/// Same layout for the 1-minute re-evaluation.
std::string table5_csv(const ResolutionMatrix& matrix);

/// `resolution,iterations,simulations,simulated_steps,stop_reason`. Wall
/// time is machine dependent and goes to the run manifest instead.
std::string timings_csv(const ResolutionMatrix& matrix);

/// `resolution,variable,mean,sd,p05,p95`.
std::string priors_csv(std::span<const PriorSummary> priors);

/// `resolution,iteration,channel,theta_cvrmse,theta_nmbe,best_score`, one row
/// per calibrated channel and iteration.
std::string convergence_csv(std::span<const CalibrationResult> results);

/// `resolution,variable,value` for each best vector.
std::string best_parameters_csv(std::span<const CalibrationResult> results, const ParameterSpace& space);

/// Spearman rank correlation with average ranks for ties. Needs two samples
/// of equal length >= 2; returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Per-channel degradation of the 1-minute CVRMSE across resolutions.
struct ChannelTrend {
    Channel channel{Channel::Heating};
    double spearman{0.0};  ///< coarseness rank vs CVRMSE
    double ratio{0.0};     ///< coarsest row CVRMSE / finest row CVRMSE
};

/// Trend per channel present in every row. `cvrmse_by_row` holds one value
/// per row of `rows` (finest first) for each channel, e.g. seed averages.
std::vector<ChannelTrend> degradation_trend(std::span<const Resolution> rows,
                                            const std::array<std::vector<double>, 4>& cvrmse_by_row);

/// `channel,spearman,ratio`.
std::string trend_csv(std::span<const ChannelTrend> trend);

}  // namespace bemcal
