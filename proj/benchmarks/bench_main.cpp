#include "bemcal/mixture.hpp"
#include "bemcal/profiles.hpp"
#include "bemcal/sampler.hpp"
#include "bemcal/series.hpp"
#include "bemcal/simulator.hpp"
#include "bemcal/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace bemcal;

namespace {

struct Week {
    WeatherSeries weather;
    ScheduleSet schedules;
};

const Week& week() {
    static const Week w = [] {
        Week w;
        SyntheticWeatherOptions o;
        o.start   = parse_timestamp("2023-04-03T00:00:00Z");
        o.days    = 7;
        o.seed    = 1;
        w.weather = synthetic_weather(o);
        w.schedules = truth_schedules({day_of(o.start), o.days, 1, 0.1});
        return w;
    }();
    return w;
}

void BM_SimulateWeek(benchmark::State& state) {
    const auto r       = static_cast<Resolution>(state.range(0));
    const auto weather = r == Resolution::Min1 ? week().weather : resample_weather(week().weather, r);
    const auto ctx     = make_context(weather, week().schedules, r);
    const auto p       = reference_parameters();
    for (auto _ : state) benchmark::DoNotOptimize(simulate(p, ctx));
    state.SetLabel(std::string(name(r)));
}
BENCHMARK(BM_SimulateWeek)->Arg(static_cast<int>(Resolution::Min1))->Arg(static_cast<int>(Resolution::Hourly));

void BM_AggregateYearToHourly(benchmark::State& state) {
    std::vector<double> v(365 * 1440, 1.0);
    const MeteredSeries s(Channel::Electricity, parse_timestamp("2023-01-01T00:00:00Z"), Resolution::Min1, v);
    for (auto _ : state) benchmark::DoNotOptimize(aggregate(s, Resolution::Hourly));
}
BENCHMARK(BM_AggregateYearToHourly);

void BM_SelectK(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    DailyMatrix m;
    for (int i = 0; i < state.range(0); ++i) {
        std::vector<double> row(24);
        for (int h = 0; h < 24; ++h) row[h] = (i % 3 == 0 ? h : 24 - h) + z(rng);
        m.rows.push_back(row);
    }
    for (auto _ : state) benchmark::DoNotOptimize(select_k(m, 2, 10, 1));
}
BENCHMARK(BM_SelectK)->Arg(120)->Arg(365);

void BM_FitMixture(benchmark::State& state) {
    const auto space = ParameterSpace::building_defaults();
    const auto x     = latin_hypercube(space.lower(), space.upper(), 20, 3);
    FitOptions opt;
    for (auto _ : state) benchmark::DoNotOptimize(fit_mixture(x, space.lower(), space.upper(), opt));
}
BENCHMARK(BM_FitMixture);

void BM_TruncatedDraws(benchmark::State& state) {
    const auto space = ParameterSpace::building_defaults();
    const auto fit   = fit_mixture(latin_hypercube(space.lower(), space.upper(), 20, 3), space.lower(),
                                   space.upper(), FitOptions{});
    for (auto _ : state) benchmark::DoNotOptimize(sample_truncated(fit.model, 200, 5));
}
BENCHMARK(BM_TruncatedDraws);

}  // namespace
BENCHMARK_MAIN();
