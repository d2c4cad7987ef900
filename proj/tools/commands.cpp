#include "commands.hpp"

#include "manifest.hpp"

#include "bemcal/csv.hpp"
#include "bemcal/error.hpp"
#include "bemcal/log.hpp"
#include "bemcal/report.hpp"
#include "bemcal/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <iostream>

#include <fmt/format.h>

namespace bemcal::cli {

namespace fs = std::filesystem;
using json   = nlohmann::ordered_json;

namespace {

std::uint64_t resolution_seed(std::uint64_t seed, Resolution r) {
    return derive_seed(seed, 1000 + static_cast<std::uint64_t>(rank(r)));
}

json parameters_json(const ParameterSpace& space, const ParameterVector& p) {
    json out = json::object();
    for (std::size_t i = 0; i < space.size(); ++i) out[space[i].name] = p[i];
    return out;
}

std::vector<fs::path> input_files(const RunConfig& c) {
    std::vector<fs::path> files(c.measurements.begin(), c.measurements.end());
    files.push_back(c.weather_primary);
    files.push_back(c.weather_secondary);
    return files;
}

}  // namespace

SyntheticDataset synthesize(const RunConfig& config) {
    const auto& sy = config.synth;
    if (seconds_of_day(sy.start) != 0) {
        throw ValidationError("synth.start must be a UTC midnight");
    }
    require_within(config.space, sy.true_parameters);

    SyntheticWeatherOptions wo;
    wo.site              = config.site;
    wo.start             = sy.start;
    wo.days              = sy.days;
    wo.seed              = sy.signal_seed;
    wo.mean_temperature  = sy.mean_temperature;
    wo.annual_amplitude  = sy.annual_amplitude;
    wo.diurnal_amplitude = sy.diurnal_amplitude;

    SyntheticDataset d;
    const auto weather = synthetic_weather(wo);
    d.secondary        = perturbed_weather(weather, sy.signal_seed);
    d.primary          = weather;
    inject_weather_gaps(d.primary, sy.weather_gaps, config.seed);
    d.schedules       = truth_schedules({day_of(sy.start), sy.days, sy.signal_seed, sy.away_fraction});
    d.true_parameters = sy.true_parameters;

    // the building experiences the merged record the pipeline reconstructs
    const auto merged = infill_weather(d.primary, d.secondary);
    const LumpedZoneSimulator simulator(config.building, config.space);
    const auto context = make_context(merged, d.schedules, Resolution::Min1);
    d.measurements     = synthesize_ground_truth(simulator, d.true_parameters, context,
                                                 {sy.noise, sy.gaps, derive_seed(config.seed, 5)});
    return d;
}

CalibrationRun run_calibration(const PreparedBundle& bundle, const RunConfig& config) {
    const LumpedZoneSimulator simulator(config.building, config.space);
    CalibrationRun run;
    for (const auto res : config.resolutions) {
        if (const auto it = bundle.skipped.find(res); it != bundle.skipped.end()) {
            run.failures.emplace(res, "not prepared: " + it->second);
            continue;
        }
        if (!bundle.measurements.contains(res) || !bundle.schedules.contains(res)) {
            run.failures.emplace(res, "not present in the prepared bundle");
            continue;
        }
        try {
            const auto& schedules = bundle.schedules.at(res);
            const auto problem    = make_problem(res, bundle.measurements.at(res),
                                                 bundle.weather.at(simulation_step(res)), schedules);
            EngineConfig ec = config.engine;
            ec.seed         = resolution_seed(config.seed, res);
            log_info(fmt::format("calibrating at {}", label(res)));
            run.results.push_back(calibrate(simulator, problem, config.space, ec));
            run.schedules.push_back(&schedules);
        } catch (const std::exception& e) {
            log_warning(fmt::format("{} calibration failed: {}", name(res), e.what()));
            run.failures.emplace(res, e.what());
        }
    }
    if (run.results.empty()) {
        return run;
    }
    std::vector<CrossInput> inputs;
    for (std::size_t i = 0; i < run.results.size(); ++i) inputs.push_back({&run.results[i], run.schedules[i]});
    run.matrix = cross_evaluate(inputs, bundle.min1(), bundle.weather.at(Resolution::Min1), simulator);
    run.priors = prior_report(run.results, config.space);
    return run;
}

std::vector<fs::path> write_run(const CalibrationRun& run, const RunConfig& config) {
    const auto& out = config.output;
    std::vector<fs::path> written;
    const auto emit = [&](const std::string& file, const std::string& text) {
        csv::write_text(out / file, text);
        written.push_back(out / file);
    };
    emit("table4.csv", table4_csv(run.matrix));
    emit("table5.csv", table5_csv(run.matrix));
    emit("timings.csv", timings_csv(run.matrix));
    emit("priors.csv", priors_csv(run.priors));
    emit("convergence.csv", convergence_csv(run.results));
    emit("best_parameters.csv", best_parameters_csv(run.results, config.space));
    std::string failures = "resolution,reason\n";
    for (const auto& [res, why] : run.failures) {
        std::string flat = why;
        for (auto& ch : flat) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        failures += fmt::format("{},{}\n", name(res), flat);
    }
    emit("failures.csv", failures);
    for (const auto& r : run.results) {
        const auto& last = r.iterations.back();
        if (!last.proposal) continue;
        std::vector<std::string> names;
        for (const auto& v : config.space.variables()) names.push_back(v.name);
        emit(fmt::format("proposals/{}.json", name(r.resolution)), to_json(*last.proposal, names) + "\n");
    }
    return written;
}

int cmd_synth(const RunConfig& config) {
    const auto d = synthesize(config);
    std::vector<fs::path> files;
    for (const auto c : kAllChannels) {
        csv::write_series(config.measurements[index(c)], d.measurements[index(c)]);
        files.push_back(config.measurements[index(c)]);
    }
    csv::write_weather(config.weather_primary, d.primary);
    csv::write_weather(config.weather_secondary, d.secondary);
    files.push_back(config.weather_primary);
    files.push_back(config.weather_secondary);

    const auto dir = config.measurements[index(Channel::Electricity)].parent_path();
    json truth;
    truth["true_parameters"] = parameters_json(config.space, d.true_parameters);
    truth["noise"]           = config.synth.noise;
    truth["seed"]            = config.seed;
    truth["signal_seed"]     = config.synth.signal_seed;
    json types               = json::array();
    for (const auto t : d.schedules.role(ScheduleRole::Appliances).day_cluster) types.push_back(t);
    truth["day_types"] = types;
    truth["files"]     = digest_map(files, dir);
    write_json(dir / "truth.json", truth);
    std::cout << fmt::format("wrote {} days of synthetic data to {}\n", config.synth.days, dir.string());
    return 0;
}

int cmd_prepare(const RunConfig& config) {
    std::vector<MeteredSeries> raw;
    for (const auto c : kAllChannels) raw.push_back(csv::load_series(config.measurements[index(c)], c));
    const auto primary   = csv::load_weather(config.weather_primary, config.site);
    const auto secondary = csv::load_weather(config.weather_secondary, config.site);
    const auto bundle    = prepare(raw, primary, secondary, config.prepare);
    const auto written   = write_bundle(bundle, config.bundle);

    json manifest;
    manifest["command"] = "prepare";
    manifest["config"]  = config.effective;
    manifest["inputs"]  = digest_map(input_files(config), config.source.parent_path().empty()
                                                             ? fs::current_path()
                                                             : fs::absolute(config.source.parent_path()));
    json gaps = json::array();
    for (const auto& g : bundle.retained_gaps) {
        gaps.push_back({{"channel", name(g.channel)},
                        {"start", format_timestamp(g.start)},
                        {"end", format_timestamp(g.end)},
                        {"steps", g.steps}});
    }
    manifest["retained_gaps"] = gaps;
    json skipped = json::object();
    for (const auto& [res, why] : bundle.skipped) skipped[std::string(name(res))] = why;
    manifest["skipped"] = skipped;
    manifest["outputs"] = digest_map(written, config.bundle);
    write_json(config.bundle / "manifest.json", manifest);

    std::cout << fmt::format("prepared {} resolution(s) in {}\n", bundle.resolutions().size(), config.bundle.string());
    for (const auto& [res, why] : bundle.skipped) std::cout << fmt::format("  skipped {}: {}\n", name(res), why);
    return 0;
}

int cmd_calibrate(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    const auto bundle  = load_bundle(config.bundle);
    const auto run     = run_calibration(bundle, config);
    const auto written = write_run(run, config);

    json manifest;
    manifest["command"] = "calibrate";
    manifest["config"]  = config.effective;
    std::vector<fs::path> bundle_files;
    for (const auto& entry : fs::recursive_directory_iterator(config.bundle)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json") bundle_files.push_back(entry.path());
    }
    std::sort(bundle_files.begin(), bundle_files.end());
    manifest["bundle"] = digest_map(bundle_files, config.bundle);
    json wall          = json::object();
    for (const auto& r : run.results) wall[std::string(name(r.resolution))] = r.wall_seconds;
    manifest["wall_seconds"] = wall;
    manifest["total_wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest["outputs"] = digest_map(written, config.output);
    write_json(config.output / "manifest.json", manifest);

    for (const auto& row : run.matrix.rows) {
        std::cout << fmt::format("{:>8}  {:>3} iterations  {}\n", label(row.resolution), row.iterations, name(row.stop));
    }
    for (const auto& [res, why] : run.failures) std::cout << fmt::format("{:>8}  failed: {}\n", label(res), why);
    return run.failures.empty() ? 0 : 2;
}

int cmd_report(const RunConfig& config) {
    const auto path  = config.output / "table5.csv";
    const auto lines = csv::read_lines(path);
    if (lines.empty() || lines.front() != "resolution,channel,cvrmse,nmbe,n_points") {
        throw ValidationError(fmt::format("{}:1: not a table5 file (run calibrate first)", path.string()));
    }
    std::vector<Resolution> rows;
    std::array<std::vector<double>, 4> cv;
    std::string text = fmt::format("{:>8}", "");
    for (const auto c : kAllChannels) text += fmt::format("  {:>18}", name(c));
    text += "\n";
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto where = fmt::format("{}:{}", path.string(), ln + 1);
        const auto f     = csv::split(lines[ln]);
        if (f.size() != 5) throw ValidationError(fmt::format("{}: expected 5 fields", where));
        const auto res = parse_resolution(f[0]);
        if (rows.empty() || rows.back() != res) rows.push_back(res);
        const auto c = parse_channel(f[1]);
        cv[index(c)].resize(rows.size(), std::numeric_limits<double>::quiet_NaN());
        cv[index(c)][rows.size() - 1] = csv::parse_number(f[2], where).value_or(std::numeric_limits<double>::quiet_NaN());
    }
    for (auto& v : cv) {
        if (!v.empty()) v.resize(rows.size(), std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        text += fmt::format("{:>8}", label(rows[r]));
        for (const auto c : kAllChannels) {
            const auto& v = cv[index(c)];
            text += v.empty() ? fmt::format("  {:>18}", "-") : fmt::format("  {:>17.2f}%", v[r]);
        }
        text += "\n";
    }
    const auto trend = degradation_trend(rows, cv);
    csv::write_text(config.output / "trend.csv", trend_csv(trend));
    std::cout << "CVRMSE against 1-minute measurements\n" << text << "\n";
    for (const auto& t : trend) {
        std::cout << fmt::format("{:>12}: spearman {:.3f}, coarsest/finest {:.2f}\n", name(t.channel), t.spearman,
                                 t.ratio);
    }
    return 0;
}

}  // namespace bemcal::cli
