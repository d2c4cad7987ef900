#include "bemcal/metrics.hpp"

#include "bemcal/error.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace bemcal {

namespace {

double measured_mean(const AlignedPair& pair) {
    if (pair.count() < 2) {
        throw ValidationError(fmt::format("fit metrics need at least 2 aligned points, got {}", pair.count()));
    }
    double sum = 0.0;
    for (const double m : pair.measured) sum += m;
    const double mean = sum / static_cast<double>(pair.count());
    if (mean == 0.0) {
        throw ValidationError("measured mean is zero; channel is not calibratable");
    }
    return mean;
}

}  // namespace

double cvrmse(const AlignedPair& pair) {
    const double mean = measured_mean(pair);
    double sq         = 0.0;
    for (std::size_t i = 0; i < pair.count(); ++i) {
        const double e = pair.measured[i] - pair.simulated[i];
        sq += e * e;
    }
    return 100.0 * std::sqrt(sq / static_cast<double>(pair.count())) / mean;
}

double nmbe(const AlignedPair& pair) {
    const double mean = measured_mean(pair);
    double bias       = 0.0;
    for (std::size_t i = 0; i < pair.count(); ++i) bias += pair.measured[i] - pair.simulated[i];
    return 100.0 * (bias / static_cast<double>(pair.count())) / mean;
}

ChannelFit fit_channel(const MeteredSeries& measured, const MeteredSeries& simulated) {
    const auto pair = align(measured, simulated);
    return {cvrmse(pair), nmbe(pair), pair.count()};
}

Thresholds Thresholds::uniform(double cvrmse_pct, double nmbe_pct) {
    Thresholds t;
    t.cvrmse.fill(cvrmse_pct);
    t.nmbe.fill(nmbe_pct);
    return t;
}

bool meets(const FitReport& report, const Thresholds& thresholds) {
    bool any = false;
    for (const auto c : kAllChannels) {
        const auto& fit = report[c];
        if (!fit) continue;
        any = true;
        if (fit->cvrmse > thresholds.cvrmse[index(c)] || std::abs(fit->nmbe) > thresholds.nmbe[index(c)]) {
            return false;
        }
    }
    return any;
}

std::vector<double> raw_violations(const FitReport& report, const Thresholds& thresholds) {
    std::vector<double> eta;
    for (const auto c : kAllChannels) {
        const auto& fit = report[c];
        if (!fit) continue;
        eta.push_back(std::max(fit->cvrmse - thresholds.cvrmse[index(c)], 0.0));
        eta.push_back(std::max(std::abs(fit->nmbe) - thresholds.nmbe[index(c)], 0.0));
    }
    return eta;
}

std::vector<double> rescale_unit(std::span<const double> values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range  = *hi - *lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
    return out;
}

std::vector<DistanceScore> distance(std::span<const FitReport> reports, const Thresholds& thresholds) {
    std::vector<DistanceScore> scores(reports.size());
    if (reports.empty()) return scores;
    std::vector<std::vector<double>> raw;
    raw.reserve(reports.size());
    for (const auto& r : reports) {
        raw.push_back(raw_violations(r, thresholds));
        if (raw.back().size() != raw.front().size()) {
            throw ValidationError("fit reports in one batch cover different channels");
        }
    }
    const std::size_t dims = raw.front().size();
    for (auto& s : scores) s.components.assign(dims, 0.0);
    std::vector<double> column(reports.size());
    for (std::size_t c = 0; c < dims; ++c) {
        for (std::size_t i = 0; i < reports.size(); ++i) column[i] = raw[i][c];
        const auto scaled = rescale_unit(column);
        for (std::size_t i = 0; i < reports.size(); ++i) scores[i].components[c] = scaled[i];
    }
    for (auto& s : scores) {
        double sq = 0.0;
        for (const double v : s.components) sq += v * v;
        s.eta_hat = std::sqrt(sq);
    }
    return scores;
}

}  // namespace bemcal
