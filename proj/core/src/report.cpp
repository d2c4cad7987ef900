#include "bemcal/report.hpp"

#include "bemcal/csv.hpp"
#include "bemcal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace bemcal {

namespace {

using csv::format_number;

std::string fit_table(const ResolutionMatrix& matrix, bool min1) {
    std::string out = "resolution,channel,cvrmse,nmbe,n_points\n";
    for (const auto& row : matrix.rows) {
        const auto& report = min1 ? row.at_min1 : row.in_resolution;
        for (const auto c : kAllChannels) {
            const auto& fit = report[c];
            if (!fit) continue;
            out += fmt::format("{},{},{},{},{}\n", name(row.resolution), name(c), format_number(fit->cvrmse),
                               format_number(fit->nmbe), fit->n_points);
        }
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::string table4_csv(const ResolutionMatrix& matrix) { return fit_table(matrix, false); }

std::string table5_csv(const ResolutionMatrix& matrix) { return fit_table(matrix, true); }

std::string timings_csv(const ResolutionMatrix& matrix) {
    std::string out = "resolution,iterations,simulations,simulated_steps,stop_reason\n";
    for (const auto& row : matrix.rows) {
        out += fmt::format("{},{},{},{},{}\n", name(row.resolution), row.iterations, row.simulations,
                           row.simulated_steps, name(row.stop));
    }
    return out;
}

std::string priors_csv(std::span<const PriorSummary> priors) {
    std::string out = "resolution,variable,mean,sd,p05,p95\n";
    for (const auto& p : priors) {
        out += fmt::format("{},{},{},{},{},{}\n", name(p.resolution), p.variable, format_number(p.mean),
                           format_number(p.sd), format_number(p.p05), format_number(p.p95));
    }
    return out;
}

std::string convergence_csv(std::span<const CalibrationResult> results) {
    std::string out = "resolution,iteration,channel,theta_cvrmse,theta_nmbe,best_score\n";
    for (const auto& r : results) {
        for (const auto& it : r.iterations) {
            for (const auto c : kAllChannels) {
                const auto& cv = it.theta.cvrmse[index(c)];
                if (!cv) continue;
                out += fmt::format("{},{},{},{},{},{}\n", name(r.resolution), it.iteration, name(c),
                                   format_number(*cv), format_number(*it.theta.nmbe[index(c)]),
                                   format_number(it.best_score));
            }
        }
    }
    return out;
}

std::string best_parameters_csv(std::span<const CalibrationResult> results, const ParameterSpace& space) {
    std::string out = "resolution,variable,value\n";
    for (const auto& r : results) {
        for (std::size_t v = 0; v < space.size(); ++v) {
            out += fmt::format("{},{},{}\n", name(r.resolution), space[v].name, format_number(r.best[v]));
        }
    }
    return out;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError("spearman needs two samples of equal length >= 2");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n  = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::vector<ChannelTrend> degradation_trend(std::span<const Resolution> rows,
                                            const std::array<std::vector<double>, 4>& cvrmse_by_row) {
    std::vector<double> coarseness;
    for (const auto r : rows) coarseness.push_back(static_cast<double>(rank(r)));
    std::vector<ChannelTrend> out;
    for (const auto c : kAllChannels) {
        const auto& v = cvrmse_by_row[index(c)];
        if (v.size() != rows.size() || rows.size() < 2) continue;
        ChannelTrend t;
        t.channel  = c;
        t.spearman = spearman(coarseness, v);
        const auto finest   = std::min_element(rows.begin(), rows.end(),
                                               [](Resolution a, Resolution b) { return rank(a) < rank(b); }) -
                            rows.begin();
        const auto coarsest = std::max_element(rows.begin(), rows.end(),
                                               [](Resolution a, Resolution b) { return rank(a) < rank(b); }) -
                              rows.begin();
        t.ratio = v[static_cast<std::size_t>(coarsest)] / v[static_cast<std::size_t>(finest)];
        out.push_back(t);
    }
    return out;
}

std::string trend_csv(std::span<const ChannelTrend> trend) {
    std::string out = "channel,spearman,ratio\n";
    for (const auto& t : trend) {
        out += fmt::format("{},{},{}\n", name(t.channel), format_number(t.spearman), format_number(t.ratio));
    }
    return out;
}

}  // namespace bemcal
