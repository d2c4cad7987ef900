#pragma once

#include "bemcal/series.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bemcal {

/// Coefficient of variation of the RMSE, percent:
///   100 * sqrt(sum (m_i - s_i)^2 / n) / mean(m)
/// Requires n >= 2 and a non-zero measured mean.
double cvrmse(const AlignedPair& pair);

/// Normalized mean bias error, percent (positive: model under-predicts):
///   100 * (sum (m_i - s_i) / n) / mean(m)
double nmbe(const AlignedPair& pair);

struct ChannelFit {
    double cvrmse{0.0};
    double nmbe{0.0};
    std::size_t n_points{0};
};

/// Goodness of fit per channel; channels that are not calibrated (no
/// consumption in the measurements) are empty.
struct FitReport {
    std::array<std::optional<ChannelFit>, 4> channels{};

    const std::optional<ChannelFit>& operator[](Channel c) const { return channels[index(c)]; }
    std::optional<ChannelFit>& operator[](Channel c) { return channels[index(c)]; }
};

/// Fits one channel; throws ValidationError on a zero measured mean.
ChannelFit fit_channel(const MeteredSeries& measured, const MeteredSeries& simulated);

/// Targets per channel: CVRMSE and |NMBE| in percent.
struct Thresholds {
    std::array<double, 4> cvrmse{30.0, 30.0, 30.0, 30.0};
    std::array<double, 4> nmbe{10.0, 10.0, 10.0, 10.0};

    static Thresholds uniform(double cvrmse_pct, double nmbe_pct);
};

/// True when every present channel satisfies both thresholds.
bool meets(const FitReport& report, const Thresholds& thresholds);

struct DistanceScore {
    std::vector<double> components;  ///< rescaled violations, channel-major (cvrmse, nmbe)
    double eta_hat{0.0};
};

/// Raw violation per (channel, metric): max(metric - threshold, 0), with
/// |NMBE|. Channel-major order over the channels present in `report`.
std::vector<double> raw_violations(const FitReport& report, const Thresholds& thresholds);

/// Batch distance: raw violations min-max rescaled to [0, 1] across the
/// batch per component (constant components map to 0), combined with the
/// Euclidean norm. Every report must carry the same channel set.
std::vector<DistanceScore> distance(std::span<const FitReport> reports, const Thresholds& thresholds);

/// Min-max rescaling of one component column; constant columns map to 0.
std::vector<double> rescale_unit(std::span<const double> values);

}  // namespace bemcal
