#include "bemcal/engine.hpp"

#include "bemcal/error.hpp"
#include "bemcal/log.hpp"
#include "bemcal/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

namespace bemcal {

namespace {

constexpr std::size_t kMaxInflations   = 5;
constexpr double kInflationFactor      = 4.0;

std::string describe(const ParameterVector& p) {
    std::string out = "[";
    for (std::size_t i = 0; i < p.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", p[i]);
    return out + "]";
}

Theta theta_of(std::span<const std::optional<FitReport>> reports) {
    Theta t;
    for (const auto& r : reports) {
        if (!r) continue;
        for (const auto c : kAllChannels) {
            const auto& fit = (*r)[c];
            if (!fit) continue;
            auto& cv = t.cvrmse[index(c)];
            auto& nb = t.nmbe[index(c)];
            cv       = cv ? std::min(*cv, fit->cvrmse) : fit->cvrmse;
            nb       = nb ? std::min(*nb, std::abs(fit->nmbe)) : std::abs(fit->nmbe);
        }
    }
    return t;
}

bool improved(const Theta& before, const Theta& after, double tol) {
    const auto check = [tol](const std::optional<double>& b, const std::optional<double>& a) {
        if (!b || !a || *b <= 0.0) return false;
        return (*b - *a) / *b >= tol;
    };
    for (std::size_t c = 0; c < 4; ++c) {
        if (check(before.cvrmse[c], after.cvrmse[c]) || check(before.nmbe[c], after.nmbe[c])) return true;
    }
    return false;
}

// Raw violations divided by fixed per-component scales.
double reference_score(const FitReport& report, const Thresholds& thresholds, std::span<const double> scale) {
    const auto raw = raw_violations(report, thresholds);
    double sq      = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = raw[i] / scale[i];
        sq += v * v;
    }
    return std::sqrt(sq);
}

// Indices of successful runs, ordered by batch distance (stable on ties).
std::vector<std::size_t> rank_batch(std::span<const std::optional<FitReport>> reports, const Thresholds& thresholds) {
    std::vector<std::size_t> ok;
    std::vector<FitReport> fits;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (reports[i]) {
            ok.push_back(i);
            fits.push_back(*reports[i]);
        }
    }
    const auto scores = distance(fits, thresholds);
    std::vector<std::size_t> order(ok.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a].eta_hat < scores[b].eta_hat; });
    for (auto& o : order) o = ok[o];
    return order;
}

Eigen::MatrixXd draw_proposal(MixtureModel& model, std::size_t m, std::uint64_t seed) {
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            return sample_truncated(model, m, seed);
        } catch (const SimulationError&) {
            if (attempt == kMaxInflations) throw;
            log_warning("proposal acceptance too low; inflating mixture covariances");
            for (auto& comp : model.components) comp.covariance *= kInflationFactor;
        }
    }
}

}  // namespace

std::size_t EngineConfig::elite_count() const {
    return k ? *k : (m + 9) / 10;
}

void EngineConfig::validate() const {
    if (m < 2) {
        throw ValidationError("engine: m must be at least 2");
    }
    const auto kk = elite_count();
    if (kk < 2 || kk > m) {
        throw ValidationError(fmt::format("engine: elite count {} must lie in [2, m = {}]", kk, m));
    }
    if (!(improvement_tol > 0.0)) {
        throw ValidationError("engine: improvement_tol must be positive");
    }
    if (batch_size < 1) {
        throw ValidationError("engine: batch_size must be at least 1");
    }
    for (std::size_t c = 0; c < 4; ++c) {
        if (thresholds.cvrmse[c] < 0.0 || thresholds.nmbe[c] < 0.0) {
            throw ValidationError("engine: thresholds must be non-negative");
        }
    }
}

std::string_view name(StopReason r) {
    switch (r) {
        case StopReason::ThresholdMet: return "threshold-met";
        case StopReason::Converged: return "converged";
        case StopReason::MaxIterations: return "max-iterations";
    }
    return "unknown";
}

CalibrationProblem make_problem(Resolution resolution, std::span<const MeteredSeries> measurements,
                                const WeatherSeries& weather, const ScheduleSet& schedules) {
    CalibrationProblem p;
    p.resolution = resolution;
    for (const auto& s : measurements) {
        if (s.resolution() != resolution) {
            throw ValidationError(fmt::format("{} measurements are at {}, expected {}", name(s.channel()),
                                              name(s.resolution()), name(resolution)));
        }
        if (s.observed_count() < 2) {
            throw ValidationError(fmt::format("{} {} measurements have {} observed interval(s); at least 2 needed",
                                              name(resolution), name(s.channel()), s.observed_count()));
        }
        if (s.observed_total() > 0.0) {
            p.measurements.push_back(s);
        } else {
            log_info(fmt::format("{}: no {} consumption measured; channel not calibrated", name(resolution),
                                 name(s.channel())));
        }
    }
    if (p.measurements.empty()) {
        throw ValidationError("no channel with measured consumption to calibrate against");
    }
    p.context = make_context(weather, schedules, simulation_step(resolution));
    return p;
}

FitReport evaluate(const Simulator& simulator, const CalibrationProblem& problem, const ParameterVector& params) {
    auto out = simulator.run(params, problem.context);
    if (problem.resolution != problem.context.timestep) {
        out = post_aggregate(out, problem.resolution);
    }
    FitReport report;
    for (const auto& m : problem.measurements) {
        report[m.channel()] = fit_channel(m, out[m.channel()]);
    }
    return report;
}

BatchOutcome evaluate_batch(std::span<const ParameterVector> vectors, const Simulator& simulator,
                            const CalibrationProblem& problem, std::size_t batch_size) {
    if (vectors.empty()) {
        throw ValidationError("evaluate_batch needs at least one vector");
    }
    if (batch_size == 0) {
        throw ValidationError("batch_size must be at least 1");
    }
    const std::size_t n = vectors.size();
    BatchOutcome outcome;
    outcome.reports.resize(n);
    std::vector<std::string> errors(n);

    const auto run_one = [&](std::size_t i) {
        try {
            outcome.reports[i] = evaluate(simulator, problem, vectors[i]);
        } catch (const std::exception& e) {
            errors[i] = fmt::format("vector {} {}: {}", i, describe(vectors[i]), e.what());
        }
    };

    for (std::size_t first = 0; first < n; first += batch_size) {
        const std::size_t last = std::min(n, first + batch_size);
        if (last - first == 1) {
            run_one(first);
            continue;
        }
        std::vector<std::jthread> wave;
        wave.reserve(last - first);
        for (std::size_t i = first; i < last; ++i) wave.emplace_back(run_one, i);
    }

    for (auto& e : errors) {
        if (!e.empty()) outcome.errors.push_back(std::move(e));
    }
    if (outcome.failures() == n) {
        throw SimulationError(fmt::format("every simulation in the batch failed; first: {}", outcome.errors.front()));
    }
    return outcome;
}

CalibrationResult calibrate(const Simulator& simulator, const CalibrationProblem& problem,
                            const ParameterSpace& space, const EngineConfig& config) {
    config.validate();
    const auto clock_start = std::chrono::steady_clock::now();
    const std::size_t m    = config.m;
    const std::size_t k    = config.elite_count();
    const auto& thr        = config.thresholds;
    const auto lower       = space.lower();
    const auto upper       = space.upper();

    CalibrationResult result;
    result.resolution = problem.resolution;

    std::vector<ParameterVector> batch = lhs(space, m, derive_seed(config.seed, 0));
    std::optional<MixtureModel> proposal;
    std::vector<double> scale;
    bool have_best = false;
    Theta previous;

    for (std::size_t iter = 0;; ++iter) {
        auto outcome = evaluate_batch(batch, simulator, problem, config.batch_size);
        for (const auto& e : outcome.errors) log_warning(fmt::format("{}: {}", name(problem.resolution), e));
        result.simulations += batch.size();
        result.simulated_steps += batch.size() * problem.context.steps;

        if (iter == 0) {
            // scales of the seed batch, fixed for the rest of the run
            for (const auto& r : outcome.reports) {
                if (!r) continue;
                const auto raw = raw_violations(*r, thr);
                if (scale.empty()) scale.assign(raw.size(), 0.0);
                for (std::size_t i = 0; i < raw.size(); ++i) scale[i] = std::max(scale[i], raw[i]);
            }
            for (auto& s : scale) {
                if (s <= 0.0) s = 1.0;
            }
        }

        std::optional<std::size_t> met;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto& r = outcome.reports[i];
            if (!r) continue;
            const double score = reference_score(*r, thr, scale);
            if (meets(*r, thr) && (!met || score < reference_score(*outcome.reports[*met], thr, scale))) met = i;
            if (!have_best || score < result.best_score) {
                result.best       = batch[i];
                result.best_fit   = *r;
                result.best_score = score;
                have_best         = true;
            }
        }
        if (met) {
            result.best       = batch[*met];
            result.best_fit   = *outcome.reports[*met];
            result.best_score = reference_score(result.best_fit, thr, scale);
        }

        const auto order = rank_batch(outcome.reports, thr);
        IterationRecord rec;
        rec.iteration  = iter;
        rec.theta      = theta_of(outcome.reports);
        rec.best_score = result.best_score;
        rec.proposal   = proposal;
        rec.failures   = outcome.failures();
        for (std::size_t i = 0; i < std::min(k, order.size()); ++i) rec.elites.push_back(batch[order[i]]);
        const Theta current = rec.theta;
        result.iterations.push_back(std::move(rec));

        log_info(fmt::format("{} iteration {}: best score {:.6g}", name(problem.resolution), iter,
                             result.best_score));

        if (met) {
            result.stop = StopReason::ThresholdMet;
            break;
        }
        if (iter > 0 && !improved(previous, current, config.improvement_tol)) {
            result.stop = StopReason::Converged;
            break;
        }
        if (iter == config.max_iterations) {
            result.stop = StopReason::MaxIterations;
            break;
        }
        previous = current;

        const auto& elites = result.iterations.back().elites;
        if (elites.size() < 2) {
            throw SimulationError("fewer than two successful elites; cannot fit a proposal");
        }
        FitOptions fit_options = config.mixture;
        fit_options.seed       = derive_seed(config.seed, 2 * iter + 1);
        auto fit               = fit_mixture(to_matrix(elites), lower, upper, fit_options);
        auto draws             = draw_proposal(fit.model, m - 1, derive_seed(config.seed, 2 * iter + 2));
        proposal               = fit.model;

        batch.clear();
        batch.push_back(result.best);
        auto fresh = from_matrix(draws);
        batch.insert(batch.end(), fresh.begin(), fresh.end());
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return result;
}

ResolutionMatrix cross_evaluate(std::span<const CrossInput> inputs, std::span<const MeteredSeries> min1_measurements,
                                const WeatherSeries& min1_weather, const Simulator& simulator) {
    ResolutionMatrix matrix;
    for (const auto& in : inputs) {
        if (in.result == nullptr || in.schedules == nullptr) {
            throw ValidationError("cross evaluation input is incomplete");
        }
        const auto& res = *in.result;
        ResolutionRow row;
        row.resolution      = res.resolution;
        row.in_resolution   = res.best_fit;
        row.iterations      = res.iterations.empty() ? 0 : res.iterations.size() - 1;
        row.simulations     = res.simulations;
        row.simulated_steps = res.simulated_steps;
        row.stop            = res.stop;
        row.wall_seconds    = res.wall_seconds;
        const auto problem  = make_problem(Resolution::Min1, min1_measurements, min1_weather, *in.schedules);
        row.at_min1         = evaluate(simulator, problem, res.best);
        matrix.rows.push_back(std::move(row));
    }
    std::stable_sort(matrix.rows.begin(), matrix.rows.end(),
                     [](const ResolutionRow& a, const ResolutionRow& b) { return rank(a.resolution) < rank(b.resolution); });
    return matrix;
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) {
        throw ValidationError("percentile of an empty set");
    }
    std::sort(values.begin(), values.end());
    const double pos  = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo     = static_cast<std::size_t>(std::floor(pos));
    const auto hi     = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<PriorSummary> prior_report(std::span<const CalibrationResult> results, const ParameterSpace& space) {
    std::vector<PriorSummary> out;
    for (const auto& r : results) {
        if (r.iterations.empty() || r.final_elites().empty()) {
            throw ValidationError(fmt::format("{}: empty elite set", name(r.resolution)));
        }
        const auto& elites = r.final_elites();
        const double n     = static_cast<double>(elites.size());
        for (std::size_t v = 0; v < space.size(); ++v) {
            std::vector<double> col;
            col.reserve(elites.size());
            for (const auto& e : elites) col.push_back(e[v]);
            PriorSummary s;
            s.resolution = r.resolution;
            s.variable   = space[v].name;
            // shifted by the first value so identical elites give exactly zero spread
            double shift = 0.0;
            for (const double x : col) shift += x - col.front();
            s.mean    = col.front() + shift / n;
            double ss = 0.0;
            for (const double x : col) ss += (x - s.mean) * (x - s.mean);
            s.sd  = col.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            s.p05 = percentile(col, 5.0);
            s.p95 = percentile(col, 95.0);
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace bemcal
