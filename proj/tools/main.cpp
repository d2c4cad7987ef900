#include "commands.hpp"

#include "bemcal/error.hpp"
#include "bemcal/log.hpp"

#include <iostream>

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"Multi-resolution calibration of a lumped building energy model"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path = "bemcal.json";
    bemcal::cli::Overrides overrides;
    std::uint64_t seed = 0;
    std::size_t jobs   = 0;
    std::string resolutions;
    std::string out;
    bool verbose = false;
    bool quiet   = false;

    app.add_option("-c,--config", config_path, "JSON run configuration")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "override the run seed");
    auto* res_opt  = app.add_option("--resolutions", resolutions, "comma separated list, e.g. min1,hourly");
    auto* jobs_opt = app.add_option("--jobs", jobs, "concurrent simulations per wave")->check(CLI::PositiveNumber);
    auto* out_opt  = app.add_option("--out", out, "output directory");
    app.add_flag("-v,--verbose", verbose, "log progress");
    app.add_flag("-q,--quiet", quiet, "suppress warnings");

    auto* synth     = app.add_subcommand("synth", "generate the synthetic 1-minute dataset");
    auto* prepare   = app.add_subcommand("prepare", "infill, aggregate and mine schedules");
    auto* calibrate = app.add_subcommand("calibrate", "calibrate every requested resolution");
    auto* report    = app.add_subcommand("report", "summarise a finished calibration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    bemcal::set_log_level(quiet ? bemcal::LogLevel::Quiet : verbose ? bemcal::LogLevel::Info : bemcal::LogLevel::Warning);
    if (*seed_opt) overrides.seed = seed;
    if (*res_opt) overrides.resolutions = resolutions;
    if (*jobs_opt) overrides.jobs = jobs;
    if (*out_opt) overrides.out = out;

    try {
        const auto config = bemcal::cli::load_config(config_path, overrides);
        if (*synth) return bemcal::cli::cmd_synth(config);
        if (*prepare) return bemcal::cli::cmd_prepare(config);
        if (*calibrate) return bemcal::cli::cmd_calibrate(config);
        if (*report) return bemcal::cli::cmd_report(config);
    } catch (const bemcal::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
