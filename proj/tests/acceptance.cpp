#include "commands.hpp"
#include "config.hpp"

#include "bemcal/csv.hpp"
#include "bemcal/error.hpp"
#include "bemcal/log.hpp"
#include "bemcal/metrics.hpp"
#include "bemcal/profiles.hpp"
#include "bemcal/report.hpp"
#include "bemcal/sampler.hpp"
#include "bemcal/series.hpp"
#include "bemcal/synthetic.hpp"
#include "bemcal/weather.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <CLI11.hpp>
#include <fmt/format.h>

using namespace bemcal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;  ///< 0: reported only
    std::function<Outcome()> run;
};

fs::path g_workdir;
std::vector<StopReason> g_zero_threshold_stops;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// Runs a command with its console chatter discarded.
void quietly(const std::function<void()>& fn) {
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    try {
        fn();
    } catch (...) {
        std::cout.rdbuf(old);
        throw;
    }
    std::cout.rdbuf(old);
}

cli::RunConfig write_config(const fs::path& dir, const std::string& text) {
    fs::create_directories(dir);
    std::ofstream(dir / "run.json") << text;
    return cli::load_config(dir / "run.json");
}

// 1 ----------------------------------------------------------------------------------------------

Outcome metric_oracle() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::uniform_int_distribution<std::size_t> len(2, 500);
    std::size_t bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        AlignedPair p;
        const auto n = len(rng);
        for (std::size_t i = 0; i < n; ++i) {
            p.measured.push_back(u(rng) + 1.0);
            p.simulated.push_back(u(rng));
        }
        long double sm = 0, se = 0, sq = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const long double e = static_cast<long double>(p.measured[i]) - p.simulated[i];
            sm += p.measured[i];
            se += e;
            sq += e * e;
        }
        const long double mean = sm / n;
        const double cv        = static_cast<double>(100.0L * std::sqrt(sq / n) / mean);
        const double nb        = static_cast<double>(100.0L * (se / n) / mean);
        if (!close_rel(cvrmse(p), cv, 1e-9) || !close_rel(nmbe(p), nb, 1e-9)) ++bad;
    }
    const AlignedPair hand{{2, 2, 2}, {1, 3, 2}};
    const double cv = cvrmse(hand);
    const bool hand_ok = std::round(cv * 100.0) / 100.0 == 40.82 && nmbe(hand) == 0.0 &&
                         cvrmse({{1, 2, 3}, {1, 2, 3}}) == 0.0;
    return {bad == 0 && hand_ok, fmt::format("{} oracle mismatches, hand CVRMSE {:.4f}%", bad, cv)};
}

// 2 ----------------------------------------------------------------------------------------------

Outcome aggregation_invariants() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::bernoulli_distribution gap(0.002);
    const std::array<Resolution, 4> sources{Resolution::Min1, Resolution::Min5, Resolution::Min15, Resolution::Hourly};
    std::size_t conservation = 0, composition = 0, checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const bool monthly = trial % 5 == 0;
        const auto source  = monthly ? (trial % 2 == 0 ? Resolution::Hourly : Resolution::Min30) : sources[trial % 4];
        const int month    = 1 + static_cast<int>(rng() % 10);
        const auto start   = parse_timestamp(fmt::format("2023-{:02}-01T00:00:00Z", month)) +
                           std::chrono::days{monthly ? 0 : static_cast<int>(rng() % 20)};
        std::size_t days   = monthly ? 0 : 1 + rng() % (source == Resolution::Min1 ? 2 : 6);
        if (monthly) {
            const auto end = next_month_start(next_month_start(start));
            days           = static_cast<std::size_t>((end - start).count() / 86400);
        }
        const auto n = days * 86400 / static_cast<std::size_t>(step_seconds(source));
        std::vector<double> v(n);
        std::vector<bool> miss(n, false);
        for (std::size_t i = 0; i < n; ++i) v[i] = u(rng);
        const bool with_gaps = trial % 3 == 0;
        if (with_gaps) {
            for (std::size_t i = 0; i < n; ++i) miss[i] = gap(rng);
        }
        const MeteredSeries s(Channel::Electricity, start, source, v, miss);

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += v[i];
        std::vector<Resolution> targets;
        for (const auto r : kAllResolutions) {
            if (coarser_than(r, source) && (!is_calendar(r) || monthly)) targets.push_back(r);
        }
        for (const auto t : targets) {
            const auto a = aggregate(s, t);
            ++checked;
            if (!with_gaps) {
                double sum = 0.0;
                for (const double x : a.values()) sum += x;
                if (!close_rel(sum, total, 1e-9)) ++conservation;
            }
            // every coarser level reached through an intermediate one
            for (const auto mid : targets) {
                if (!finer_than(mid, t)) continue;
                const auto b = aggregate(aggregate(s, mid), t);
                bool same    = a.size() == b.size() && a.missing() == b.missing();
                for (std::size_t i = 0; same && i < a.size(); ++i) {
                    if (!a.is_missing(i)) same = close_rel(a.value(i), b.value(i), 1e-9);
                }
                if (!same) ++composition;
            }
        }
    }
    return {conservation == 0 && composition == 0,
            fmt::format("{} aggregations, {} conservation and {} composition violations", checked, conservation,
                        composition)};
}

// 3 ----------------------------------------------------------------------------------------------

Outcome reindl_identity() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> cosz(0.05, 1.0), kt(0.001, 1.0), ecc(0.967, 1.034);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double c   = cosz(rng);
        const double g0h = kSolarConstant * ecc(rng) * c;
        const double ghi = kt(rng) * g0h;
        const auto s     = reindl_split(ghi, c, g0h);
        worst            = std::max(worst, std::abs(s.dhi + s.dni * c - ghi) / ghi);
    }
    const double f02 = reindl_diffuse_fraction(0.2);
    const double f09 = reindl_diffuse_fraction(0.9);
    const bool spots = std::abs(f02 - 0.9704) < 1e-12 && std::abs(f09 - 0.147) < 1e-12;
    return {worst <= 1e-9 && spots,
            fmt::format("max relative residual {:.2e}, fd(0.2) = {:.4f}, fd(0.9) = {:.3f}", worst, f02, f09)};
}

// 4 ----------------------------------------------------------------------------------------------

Outcome lhs_strata() {
    const auto space = ParameterSpace::building_defaults();
    std::size_t bad  = 0, designs = 0;
    for (const std::size_t m : {10u, 100u, 1000u}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto x = latin_hypercube(space.lower(), space.upper(), m, seed);
            ++designs;
            for (Eigen::Index d = 0; d < x.cols(); ++d) {
                std::vector<int> count(m, 0);
                for (Eigen::Index i = 0; i < x.rows(); ++i) {
                    const double u = (x(i, d) - space[d].lo) / space[d].width();
                    const auto k   = static_cast<long>(std::floor(u * static_cast<double>(m)));
                    if (k < 0 || k >= static_cast<long>(m)) {
                        ++bad;
                        continue;
                    }
                    ++count[k];
                }
                if (std::any_of(count.begin(), count.end(), [](int c) { return c != 1; })) ++bad;
            }
        }
    }
    return {bad == 0, fmt::format("{} designs x {} dimensions, {} with a stratum not holding exactly one point",
                                  designs, space.size(), bad)};
}

// 5 ----------------------------------------------------------------------------------------------

Outcome truncated_sampling() {
    const auto space = ParameterSpace::building_defaults();
    MixtureModel model;
    model.lower = space.lower();
    model.upper = space.upper();
    const Eigen::VectorXd width = model.upper - model.lower;
    for (const double corner : {0.2, 0.8}) {
        MixtureComponent c;
        c.weight     = 0.5;
        c.mean       = model.lower + corner * width;
        c.covariance = (0.15 * width).array().square().matrix().asDiagonal();
        model.components.push_back(c);
    }
    const auto x       = sample_truncated(model, 100000, 11);
    std::size_t outside = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) outside += !model.inside(x.row(i).transpose());

    MixtureModel half;
    half.lower = Eigen::VectorXd::Zero(1);
    half.upper = Eigen::VectorXd::Constant(1, 1e3);
    half.components.push_back({1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)});
    const double mean = sample_truncated(half, 100000, 12).mean();
    const double want = std::sqrt(2.0 / std::numbers::pi);
    return {outside == 0 && x.rows() == 100000 && std::abs(mean - want) <= 0.01,
            fmt::format("{} of 100000 draws outside the box, half-normal mean {:.4f} vs {:.4f}", outside, mean, want)};
}

// 6 ----------------------------------------------------------------------------------------------

Outcome clustering_recovery() {
    std::size_t recovered = 0, increases = 0;
    double min_ratio      = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> z(0.0, 1.0);
        const std::size_t dims = 24;
        std::vector<std::vector<double>> centres(3, std::vector<double>(dims));
        for (auto& c : centres) {
            for (auto& v : c) v = 3.0 * u(rng);
        }
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = a + 1; b < 3; ++b) {
                double d = 0.0;
                for (std::size_t k = 0; k < dims; ++k) d += std::pow(centres[a][k] - centres[b][k], 2);
                min_sep = std::min(min_sep, std::sqrt(d));
            }
        }
        // spread: RMS distance of a member from its centre
        const double spread = min_sep / 12.0;
        const double sigma  = spread / std::sqrt(static_cast<double>(dims));
        DailyMatrix m;
        m.resolution = Resolution::Hourly;
        m.first_day  = day_of(parse_timestamp("2023-01-02T00:00:00Z"));
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t members = 8 + rng() % 20;
            for (std::size_t i = 0; i < members; ++i) {
                auto row = centres[c];
                for (auto& v : row) v += sigma * z(rng);
                m.rows.push_back(row);
            }
        }
        std::shuffle(m.rows.begin(), m.rows.end(), rng);
        m.calendar_days = m.rows.size();
        m.day_index.resize(m.rows.size());
        std::iota(m.day_index.begin(), m.day_index.end(), 0);
        min_ratio = std::min(min_ratio, min_sep / spread);

        const DistanceMatrix d(m.rows);
        const auto sel = select_k(d, 2, 10, seed);
        recovered += sel.chosen_k == 3;
        for (std::size_t k = 2; k <= 10; ++k) {
            const auto pam = kmedoids(d, k, seed);
            for (std::size_t i = 1; i < pam.cost_history.size(); ++i) {
                increases += pam.cost_history[i] > pam.cost_history[i - 1];
            }
        }
    }
    return {recovered == 20 && increases == 0,
            fmt::format("planted count recovered for {}/20 seeds (separation {:.0f}x spread), {} cost increases",
                        recovered, min_ratio, increases)};
}

// 7 ----------------------------------------------------------------------------------------------

Outcome self_recovery() {
    const auto dir = g_workdir / "self_recovery";
    fs::remove_all(dir);
    const auto cfg = write_config(dir, R"({
  "seed": 1,
  "resolutions": ["min1"],
  "engine": {"m": 200, "max_iterations": 20, "thresholds": {"cvrmse": 4.9, "nmbe": 1}},
  "synth": {"start": "2023-04-03T00:00:00Z", "days": 28, "noise": 0.0, "gaps": [], "weather_gaps": ["1x2h"]}
})");
    quietly([&] {
        cli::cmd_synth(cfg);
        cli::cmd_prepare(cfg);
    });
    const auto bundle = load_bundle(cfg.bundle);
    const auto run    = cli::run_calibration(bundle, cfg);
    if (run.results.size() != 1) return {false, "calibration failed: " + run.failures.begin()->second};
    const auto& r   = run.results.front();
    const auto& row = run.matrix.rows.front();
    bool fits       = true;
    std::string cv;
    for (const auto c : kAllChannels) {
        if (!row.at_min1[c]) continue;
        fits = fits && row.at_min1[c]->cvrmse < 5.0;
        cv += fmt::format(" {} {:.2f}%", name(c), row.at_min1[c]->cvrmse);
    }
    const double dhw   = r.best[Param::DhwPeakFlow] / cfg.synth.true_parameters[Param::DhwPeakFlow];
    const auto iters   = r.iterations.size() - 1;
    const bool dhw_ok  = std::abs(dhw - 1.0) <= 0.2;
    return {fits && dhw_ok && iters <= 20,
            fmt::format("CVRMSE{}; DHW peak flow {:+.1f}% of truth; {} iterations ({})", cv, 100.0 * (dhw - 1.0),
                        iters, name(r.stop))};
}

// 8 ----------------------------------------------------------------------------------------------

constexpr const char* kNoisyConfig = R"({
  "seed": 1,
  "engine": {"m": 200, "max_iterations": 20, "thresholds": {"cvrmse": 0, "nmbe": 0}},
  "synth": {"start": "2023-04-01T00:00:00Z", "days": 61, "noise": 0.05, "gaps": ["2x2h"], "weather_gaps": ["2x3h"]}
})";

Outcome degradation_trend_check() {
    const auto dir = g_workdir / "degradation";
    fs::remove_all(dir);
    auto cfg = write_config(dir, kNoisyConfig);
    quietly([&] {
        cli::cmd_synth(cfg);
        cli::cmd_prepare(cfg);
    });
    const auto bundle = load_bundle(cfg.bundle);

    std::vector<Resolution> rows;
    std::array<std::vector<double>, 4> mean_cv;
    const std::size_t seeds = 5;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        cfg.seed       = seed;
        const auto run = cli::run_calibration(bundle, cfg);
        if (!run.failures.empty()) {
            return {false, fmt::format("seed {}: {} failed: {}", seed, name(run.failures.begin()->first),
                                       run.failures.begin()->second)};
        }
        for (const auto& r : run.results) g_zero_threshold_stops.push_back(r.stop);
        if (rows.empty()) {
            for (const auto& row : run.matrix.rows) rows.push_back(row.resolution);
            for (auto& v : mean_cv) v.assign(rows.size(), 0.0);
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (const auto c : kAllChannels) mean_cv[index(c)][i] += run.matrix.rows[i].at_min1[c]->cvrmse / seeds;
        }
    }
    const auto trend = degradation_trend(rows, mean_cv);
    csv::write_text(dir / "trend.csv", trend_csv(trend));
    bool monotone = rows.size() == kAllResolutions.size();
    std::string detail;
    for (const auto& t : trend) {
        monotone = monotone && t.spearman >= 0.8;
        detail += fmt::format("{} rho {:.2f} ratio {:.2f}; ", name(t.channel), t.spearman, t.ratio);
    }
    const double occupant = std::min(trend[index(Channel::Electricity)].ratio, trend[index(Channel::DHW)].ratio);
    const double thermal  = std::max(trend[index(Channel::Heating)].ratio, trend[index(Channel::Cooling)].ratio);
    detail += fmt::format("{} rows", rows.size());
    return {monotone && occupant > thermal, detail};
}

// 9 ----------------------------------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BEMCAL_CLI_PATH) + " -q " + args + " > /dev/null 2>&1";
    const int status      = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
    const auto dir = g_workdir / "determinism";
    fs::remove_all(dir);
    write_config(dir, R"({
  "seed": 4,
  "bundle": "bundle",
  "resolutions": ["min15", "hourly", "hour6", "daily"],
  "engine": {"m": 60, "max_iterations": 4, "thresholds": {"cvrmse": 0, "nmbe": 0}},
  "synth": {"start": "2023-04-03T00:00:00Z", "days": 21, "noise": 0.05, "gaps": ["1x1h"]}
})");
    const auto cfg = (dir / "run.json").string();
    if (run_cli("-c " + cfg + " synth") != 0 || run_cli("-c " + cfg + " prepare") != 0) {
        return {false, "synth or prepare failed"};
    }
    const std::vector<std::pair<std::string, int>> runs{{"jobs1_a", 1}, {"jobs1_b", 1}, {"jobs8_a", 8}, {"jobs8_b", 8}};
    for (const auto& [out, jobs] : runs) {
        if (const int code = run_cli(fmt::format("-c {} --jobs {} --out {} calibrate", cfg, jobs, (dir / out).string()));
            code != 0) {
            return {false, fmt::format("calibrate --jobs {} exited with {}", jobs, code)};
        }
    }
    std::size_t compared = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir / runs[0].first)) {
        const auto ext = entry.path().extension();
        if (!entry.is_regular_file() || (ext != ".csv" && entry.path().parent_path().filename() != "proposals")) {
            continue;
        }
        const auto rel       = fs::relative(entry.path(), dir / runs[0].first);
        const auto reference = slurp(entry.path());
        for (std::size_t i = 1; i < runs.size(); ++i) {
            ++compared;
            const auto other = dir / runs[i].first / rel;
            if (!fs::exists(other) || slurp(other) != reference) ++differing;
        }
    }
    return {compared > 0 && differing == 0,
            fmt::format("{} artifact comparisons across --jobs 1 and 8, {} differ", compared, differing)};
}

// 10 ---------------------------------------------------------------------------------------------

Outcome stopping_rule() {
    const auto timings = slurp(g_workdir / "determinism" / "jobs1_a" / "timings.csv");
    std::size_t from_csv = 0, met = 0;
    std::istringstream lines(timings);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++from_csv;
        met += line.ends_with(",threshold-met");
    }
    for (const auto s : g_zero_threshold_stops) met += s == StopReason::ThresholdMet;
    const auto total = from_csv + g_zero_threshold_stops.size();
    return {total > 0 && met == 0, fmt::format("{} zero-threshold runs, {} stopped on threshold-met", total, met)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::string workdir = "acceptance_work";
    std::vector<int> only;
    app.add_option("--workdir", workdir, "scratch directory for generated data")->capture_default_str();
    app.add_option("--only", only, "run a subset of criteria");
    CLI11_PARSE(app, argc, argv);
    g_workdir = fs::absolute(workdir);
    fs::create_directories(g_workdir);
    set_log_level(LogLevel::Quiet);

    const std::vector<Criterion> criteria{
        {1, "metric oracle equivalence", 1.0, metric_oracle},
        {2, "aggregation conservation and composition", 10.0, aggregation_invariants},
        {3, "Reindl reconstruction identity", 5.0, reindl_identity},
        {4, "LHS stratification", 10.0, lhs_strata},
        {5, "truncated sampling", 10.0, truncated_sampling},
        {6, "clustering recovery", 60.0, clustering_recovery},
        {7, "synthetic self-recovery at 1-min", 0.0, self_recovery},
        {8, "resolution degradation trend", 7200.0, degradation_trend_check},
        {9, "determinism across --jobs", 0.0, determinism},
        {10, "stopping rule with zero thresholds", 0.0, stopping_rule},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("error: {}", e.what())};
        }
        const double secs = seconds_since(t0);
        if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
            o.pass = false;
            o.detail += fmt::format("; over the {:.0f} s budget", c.budget_seconds);
        }
        failed += !o.pass;
        std::cout << fmt::format("criterion {:>2}: {}  {} ({}; {:.1f} s)\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                                 o.detail, secs)
                  << std::flush;
    }
    return failed == 0 ? 0 : 1;
}
