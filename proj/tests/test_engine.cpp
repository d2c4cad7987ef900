#include "bemcal/engine.hpp"
#include "bemcal/error.hpp"
#include "bemcal/sampler.hpp"
#include "bemcal/synthetic.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

using namespace bemcal;

namespace {

struct Fixture {
    WeatherSeries min1_weather;
    WeatherSeries hourly_weather;
    ScheduleSet schedules;
    std::vector<MeteredSeries> min1_truth;
    std::vector<MeteredSeries> hourly_truth;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture f;
        SyntheticWeatherOptions w;
        w.start          = parse_timestamp("2023-04-03T00:00:00Z");
        w.days           = 4;
        w.seed           = 2;
        f.min1_weather   = synthetic_weather(w);
        f.hourly_weather = resample_weather(f.min1_weather, Resolution::Hourly);
        TruthScheduleOptions s;
        s.first_day = day_of(w.start);
        s.days      = w.days;
        s.seed      = 2;
        f.schedules = truth_schedules(s);
        const auto fine   = simulate(reference_parameters(), make_context(f.min1_weather, f.schedules, Resolution::Min1));
        const auto hourly = simulate(reference_parameters(), make_context(f.hourly_weather, f.schedules, Resolution::Hourly));
        for (const auto c : kAllChannels) {
            f.min1_truth.push_back(fine[c]);
            f.hourly_truth.push_back(hourly[c]);
        }
        return f;
    }();
    return f;
}

CalibrationProblem hourly_problem() {
    const auto& f = fixture();
    return make_problem(Resolution::Hourly, f.hourly_truth, f.hourly_weather, f.schedules);
}

EngineConfig small_config() {
    EngineConfig c;
    c.m              = 40;
    c.max_iterations = 4;
    c.batch_size     = 8;
    c.seed           = 5;
    c.thresholds     = Thresholds::uniform(0.0, 0.0);
    return c;
}

// Wraps the lumped simulator; tracks concurrency and fails on request.
class ProbeSimulator final : public Simulator {
public:
    std::function<bool(const ParameterVector&)> fail_if;
    mutable std::atomic<int> in_flight{0};
    mutable std::atomic<int> peak{0};
    mutable std::atomic<int> calls{0};
    std::chrono::milliseconds pause{0};

    SimulationOutput run(const ParameterVector& p, const SimulationContext& ctx, const RunOptions& opt) const override {
        const int now = ++in_flight;
        int seen      = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        ++calls;
        std::this_thread::sleep_for(pause);
        struct Leave {
            std::atomic<int>& n;
            ~Leave() { --n; }
        } leave{in_flight};
        if (fail_if && fail_if(p)) throw SimulationError("probe failure");
        return inner_.run(p, ctx, opt);
    }
    std::string_view name() const override { return "probe"; }

private:
    LumpedZoneSimulator inner_;
};

}  // namespace

TEST(EngineConfig, ElitesAndValidation) {
    EngineConfig c;
    EXPECT_EQ(c.elite_count(), 20u);
    c.m = 15;
    EXPECT_EQ(c.elite_count(), 2u);
    c.m = 10;
    EXPECT_THROW(c.validate(), ValidationError);
    c.m = 15;
    c.k = 15;
    EXPECT_NO_THROW(c.validate());
    c.k = 16;
    EXPECT_THROW(c.validate(), ValidationError);
    c.k          = std::nullopt;
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Engine, TruthScoresZero) {
    const auto fit = evaluate(LumpedZoneSimulator{}, hourly_problem(), reference_parameters());
    for (const auto c : kAllChannels) {
        ASSERT_TRUE(fit[c].has_value());
        EXPECT_NEAR(fit[c]->cvrmse, 0.0, 1e-9);
    }
}

TEST(Engine, BatchOrderIndependentOfParallelism) {
    const auto problem = hourly_problem();
    const auto vectors = lhs(ParameterSpace::building_defaults(), 12, 3);
    const LumpedZoneSimulator sim;
    const auto serial   = evaluate_batch(vectors, sim, problem, 1);
    const auto parallel = evaluate_batch(vectors, sim, problem, 5);
    ASSERT_EQ(serial.reports.size(), 12u);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto direct = evaluate(sim, problem, vectors[i]);
        for (const auto c : kAllChannels) {
            EXPECT_EQ((*serial.reports[i])[c]->cvrmse, direct[c]->cvrmse);
            EXPECT_EQ((*parallel.reports[i])[c]->cvrmse, direct[c]->cvrmse);
            EXPECT_EQ((*parallel.reports[i])[c]->nmbe, direct[c]->nmbe);
        }
    }
}

TEST(Engine, WavesRespectBatchSize) {
    const auto problem = hourly_problem();
    const auto vectors = lhs(ParameterSpace::building_defaults(), 200, 1);
    ProbeSimulator sim;
    sim.pause        = std::chrono::milliseconds(2);
    const auto batch = evaluate_batch(vectors, sim, problem, 30);
    EXPECT_EQ(sim.calls.load(), 200);
    EXPECT_LE(sim.peak.load(), 30);
    EXPECT_EQ(batch.failures(), 0u);
}

TEST(Engine, FailedRunsAreReportedNotFatal) {
    const auto problem = hourly_problem();
    const auto vectors = lhs(ParameterSpace::building_defaults(), 10, 2);
    ProbeSimulator sim;
    sim.fail_if      = [](const ParameterVector& p) { return p[Param::OccupantGain] < 0.95; };
    const auto batch = evaluate_batch(vectors, sim, problem, 4);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const bool fails = vectors[i][Param::OccupantGain] < 0.95;
        expected += fails;
        EXPECT_EQ(batch.reports[i].has_value(), !fails);
    }
    EXPECT_GT(expected, 0u);
    EXPECT_EQ(batch.failures(), expected);

    sim.fail_if = [](const ParameterVector&) { return true; };
    EXPECT_THROW(evaluate_batch(vectors, sim, problem, 4), SimulationError);
}

TEST(Engine, GenerousThresholdsStopImmediately) {
    auto c       = small_config();
    c.thresholds = Thresholds::uniform(1e9, 1e9);
    const auto r = calibrate(LumpedZoneSimulator{}, hourly_problem(), ParameterSpace::building_defaults(), c);
    EXPECT_EQ(r.stop, StopReason::ThresholdMet);
    EXPECT_EQ(r.iterations.size(), 1u);
    EXPECT_EQ(r.simulations, 40u);
}

TEST(Engine, ZeroThresholdsNeverMet) {
    const auto r = calibrate(LumpedZoneSimulator{}, hourly_problem(), ParameterSpace::building_defaults(),
                             small_config());
    EXPECT_NE(r.stop, StopReason::ThresholdMet);
    EXPECT_LE(r.iterations.size(), 5u);
    for (std::size_t i = 1; i < r.iterations.size(); ++i) {
        EXPECT_LE(r.iterations[i].best_score, r.iterations[i - 1].best_score);
        EXPECT_TRUE(r.iterations[i].proposal.has_value());
    }
    for (const auto& it : r.iterations) EXPECT_EQ(it.elites.size(), 4u);
    EXPECT_EQ(r.simulations, 40u * r.iterations.size());
    EXPECT_EQ(r.simulated_steps, r.simulations * 96u);
    EXPECT_TRUE(within(ParameterSpace::building_defaults(), r.best));
}

TEST(Engine, MaxIterationsCap) {
    auto c            = small_config();
    c.max_iterations  = 1;
    c.improvement_tol = 1e-12;
    const auto r = calibrate(LumpedZoneSimulator{}, hourly_problem(), ParameterSpace::building_defaults(), c);
    EXPECT_NE(r.stop, StopReason::ThresholdMet);
    EXPECT_EQ(r.iterations.size(), 2u);
}

TEST(Engine, AllSamplesElite) {
    auto c           = small_config();
    c.m              = 10;
    c.k              = 10;
    c.max_iterations = 2;
    const auto r = calibrate(LumpedZoneSimulator{}, hourly_problem(), ParameterSpace::building_defaults(), c);
    EXPECT_EQ(r.final_elites().size(), 10u);
}

TEST(Engine, ReproducibleAcrossBatchSizes) {
    const auto problem = hourly_problem();
    auto c             = small_config();
    const auto a       = calibrate(LumpedZoneSimulator{}, problem, ParameterSpace::building_defaults(), c);
    c.batch_size       = 1;
    const auto b       = calibrate(LumpedZoneSimulator{}, problem, ParameterSpace::building_defaults(), c);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.best_score, b.best_score);
    EXPECT_EQ(a.iterations.size(), b.iterations.size());
    EXPECT_EQ(a.final_elites(), b.final_elites());
}

TEST(Engine, DailyProblemUsesHourlySimulation) {
    const auto& f = fixture();
    std::vector<MeteredSeries> daily;
    for (const auto& s : f.hourly_truth) daily.push_back(aggregate(s, Resolution::Daily));
    const auto problem = make_problem(Resolution::Daily, daily, f.hourly_weather, f.schedules);
    EXPECT_EQ(problem.context.timestep, Resolution::Hourly);
    const auto fit = evaluate(LumpedZoneSimulator{}, problem, reference_parameters());
    EXPECT_NEAR(fit[Channel::Heating]->cvrmse, 0.0, 1e-9);
}

TEST(Engine, ProblemSkipsSilentChannels) {
    const auto& f = fixture();
    auto series   = f.hourly_truth;
    series[index(Channel::Cooling)] = MeteredSeries(Channel::Cooling, series[0].start(), Resolution::Hourly,
                                                    std::vector<double>(series[0].size(), 0.0));
    const auto problem = make_problem(Resolution::Hourly, series, f.hourly_weather, f.schedules);
    EXPECT_EQ(problem.measurements.size(), 3u);
    EXPECT_FALSE(evaluate(LumpedZoneSimulator{}, problem, reference_parameters())[Channel::Cooling].has_value());
}

TEST(Priors, IdenticalElitesHaveZeroSpread) {
    CalibrationResult r;
    r.resolution = Resolution::Daily;
    IterationRecord it;
    it.elites.assign(5, reference_parameters());
    r.iterations.push_back(it);
    const auto space = ParameterSpace::building_defaults();
    const auto rows  = prior_report(std::span<const CalibrationResult>(&r, 1), space);
    ASSERT_EQ(rows.size(), space.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].sd, 0.0);
        EXPECT_EQ(rows[i].mean, reference_parameters()[i]);
        EXPECT_EQ(rows[i].p05, rows[i].p95);
    }
}

TEST(Priors, PercentileInterpolates) {
    EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 50), 2.5);
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 0), 1.0);
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 100), 5.0);
    EXPECT_DOUBLE_EQ(percentile({0, 10}, 5), 0.5);
    EXPECT_DOUBLE_EQ(percentile({7}, 95), 7.0);
}

TEST(CrossEvaluate, Min1RowMatchesItself) {
    const auto& f      = fixture();
    const auto problem = make_problem(Resolution::Min1, f.min1_truth, f.min1_weather, f.schedules);
    auto c             = small_config();
    c.m                = 20;
    c.max_iterations   = 1;
    const LumpedZoneSimulator sim;
    const auto r = calibrate(sim, problem, ParameterSpace::building_defaults(), c);
    const std::vector<CrossInput> inputs{{&r, &f.schedules}};
    const auto matrix = cross_evaluate(inputs, f.min1_truth, f.min1_weather, sim);
    ASSERT_EQ(matrix.rows.size(), 1u);
    for (const auto ch : kAllChannels) {
        EXPECT_EQ(matrix.rows[0].in_resolution[ch]->cvrmse, matrix.rows[0].at_min1[ch]->cvrmse);
        EXPECT_EQ(matrix.rows[0].in_resolution[ch]->nmbe, matrix.rows[0].at_min1[ch]->nmbe);
    }
}
