#include "bemcal/pipeline.hpp"

#include "bemcal/csv.hpp"
#include "bemcal/error.hpp"
#include "bemcal/log.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

namespace bemcal {

namespace fs = std::filesystem;
using json   = nlohmann::ordered_json;

namespace {

std::vector<RetainedGap> find_gaps(const MeteredSeries& s) {
    std::vector<RetainedGap> gaps;
    for (std::size_t i = 0; i < s.size();) {
        if (!s.is_missing(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && s.is_missing(j)) ++j;
        gaps.push_back({s.channel(), s.time_at(i), s.time_at(j), j - i});
        i = j;
    }
    return gaps;
}

ScheduleSet schedules_for(Resolution res, const std::vector<MeteredSeries>& channels, const MiningOptions& mining) {
    if (!finer_than(res, Resolution::Daily)) {
        return nominal_schedules(res);
    }
    return mine_schedules(channels[index(Channel::Electricity)], channels[index(Channel::DHW)], mining);
}

}  // namespace

const std::vector<MeteredSeries>& PreparedBundle::min1() const {
    const auto it = measurements.find(Resolution::Min1);
    if (it == measurements.end()) {
        throw ValidationError("bundle has no 1-minute measurements");
    }
    return it->second;
}

std::vector<Resolution> PreparedBundle::resolutions() const {
    std::vector<Resolution> out;
    for (const auto& [res, _] : schedules) {
        if (measurements.contains(res)) out.push_back(res);
    }
    return out;
}

PreparedBundle prepare(std::span<const MeteredSeries> measurements, const WeatherSeries& primary,
                       const WeatherSeries& secondary, const PrepareOptions& options) {
    if (measurements.size() != 4) {
        throw ValidationError("prepare expects the four metered channels");
    }
    for (const auto c : kAllChannels) {
        const auto& s = measurements[index(c)];
        if (s.channel() != c) {
            throw ValidationError(fmt::format("measurement {} is not the {} channel", index(c), name(c)));
        }
        if (s.resolution() != Resolution::Min1) {
            throw ValidationError(fmt::format("{} measurements must be at 1-minute resolution", name(c)));
        }
    }
    if (primary.resolution() != Resolution::Min1 || secondary.resolution() != Resolution::Min1) {
        throw ValidationError("weather sources must be at 1-minute resolution");
    }

    PreparedBundle b;
    b.site = primary.site();

    std::vector<MeteredSeries> filled;
    for (const auto& s : measurements) {
        filled.push_back(infill_linear(s, options.max_gap_seconds));
        const auto gaps = find_gaps(filled.back());
        b.retained_gaps.insert(b.retained_gaps.end(), gaps.begin(), gaps.end());
        if (!gaps.empty()) {
            log_warning(fmt::format("{}: {} gap(s) longer than {} s left missing", name(s.channel()), gaps.size(),
                                    options.max_gap_seconds));
        }
    }

    const auto merged = infill_weather(primary, secondary);
    merged.validate();
    if (merged.start() != filled.front().start() || merged.size() != filled.front().size()) {
        throw ValidationError("weather and measurements cover different periods");
    }

    auto wanted = options.resolutions;
    if (std::find(wanted.begin(), wanted.end(), Resolution::Min1) == wanted.end()) {
        wanted.push_back(Resolution::Min1);  // cross evaluation needs it
    }
    std::sort(wanted.begin(), wanted.end(), [](Resolution a, Resolution b) { return rank(a) < rank(b); });
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

    for (const auto res : wanted) {
        try {
            std::vector<MeteredSeries> channels;
            for (const auto& s : filled) channels.push_back(aggregate(s, res));
            const auto sim = simulation_step(res);
            if (!b.weather.contains(sim)) {
                b.weather.emplace(sim, sim == Resolution::Min1 ? merged : resample_weather(merged, sim));
            }
            auto sched = schedules_for(res, channels, options.mining);
            b.schedules.emplace(res, std::move(sched));
            b.measurements.emplace(res, std::move(channels));
        } catch (const ValidationError& e) {
            if (res == Resolution::Min1) throw;
            log_warning(fmt::format("{}: skipped ({})", name(res), e.what()));
            b.skipped.emplace(res, e.what());
        }
    }
    return b;
}

std::vector<fs::path> write_bundle(const PreparedBundle& b, const fs::path& dir) {
    std::vector<fs::path> written;
    json index;
    index["site"] = {{"latitude", b.site.latitude}, {"longitude", b.site.longitude}};
    index["resolutions"] = json::array();

    for (const auto& [res, channels] : b.measurements) {
        for (const auto& s : channels) {
            const auto path = dir / "measurements" / std::string(name(res)) / fmt::format("{}.csv", name(s.channel()));
            csv::write_series(path, s);
            written.push_back(path);
        }
    }
    for (const auto& [res, w] : b.weather) {
        const auto path = dir / "weather" / fmt::format("{}.csv", name(res));
        csv::write_weather(path, w);
        written.push_back(path);
    }
    for (const auto& [res, set] : b.schedules) {
        json entry{{"resolution", name(res)}, {"nominal", set.nominal}, {"roles", json::object()}};
        for (const auto& [role, sched] : set.roles) {
            const auto base = dir / "schedules" / std::string(name(res));
            const auto prof = base / fmt::format("{}_profiles.csv", name(role));
            const auto days = base / fmt::format("{}_days.csv", name(role));
            csv::write_schedule(prof, days, sched);
            written.push_back(prof);
            written.push_back(days);
            entry["roles"][std::string(name(role))] = {{"resolution", name(sched.resolution)},
                                                       {"k", sched.chosen_k},
                                                       {"silhouette", sched.silhouette}};
        }
        index["resolutions"].push_back(entry);
    }
    json skipped = json::object();
    for (const auto& [res, why] : b.skipped) skipped[std::string(name(res))] = why;
    index["skipped"] = skipped;

    std::string gaps = "channel,start,end,steps\n";
    for (const auto& g : b.retained_gaps) {
        gaps += fmt::format("{},{},{},{}\n", name(g.channel), format_timestamp(g.start), format_timestamp(g.end),
                            g.steps);
    }
    csv::write_text(dir / "gaps.csv", gaps);
    written.push_back(dir / "gaps.csv");
    csv::write_text(dir / "bundle.json", index.dump(2) + "\n");
    written.push_back(dir / "bundle.json");
    return written;
}

PreparedBundle load_bundle(const fs::path& dir) {
    const auto index_path = dir / "bundle.json";
    if (!fs::exists(index_path)) {
        throw ValidationError(fmt::format("{}: no prepared bundle (run prepare first)", index_path.string()));
    }
    json index;
    try {
        const auto lines = csv::read_lines(index_path);
        std::string text;
        for (const auto& l : lines) text += l + "\n";
        index = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("{}: {}", index_path.string(), e.what()));
    }
    PreparedBundle b;
    b.site.latitude  = index.at("site").at("latitude").get<double>();
    b.site.longitude = index.at("site").at("longitude").get<double>();
    for (const auto& entry : index.at("resolutions")) {
        const auto res = parse_resolution(entry.at("resolution").get<std::string>());
        std::vector<MeteredSeries> channels;
        for (const auto c : kAllChannels) {
            channels.push_back(csv::load_series(
                dir / "measurements" / std::string(name(res)) / fmt::format("{}.csv", name(c)), c));
        }
        b.measurements.emplace(res, std::move(channels));
        ScheduleSet set;
        set.resolution = res;
        set.nominal    = entry.at("nominal").get<bool>();
        for (const auto& [role_name, meta] : entry.at("roles").items()) {
            const auto role = parse_role(role_name);
            const auto base = dir / "schedules" / std::string(name(res));
            auto sched      = csv::load_schedule(base / fmt::format("{}_profiles.csv", role_name),
                                                 base / fmt::format("{}_days.csv", role_name),
                                                 parse_resolution(meta.at("resolution").get<std::string>()));
            sched.silhouette = meta.at("silhouette").get<double>();
            set.roles.emplace(role, std::move(sched));
        }
        b.schedules.emplace(res, std::move(set));
        const auto sim = simulation_step(res);
        if (!b.weather.contains(sim)) {
            b.weather.emplace(sim, csv::load_weather(dir / "weather" / fmt::format("{}.csv", name(sim)), b.site));
        }
    }
    for (const auto& [res_name, why] : index.at("skipped").items()) {
        b.skipped.emplace(parse_resolution(res_name), why.get<std::string>());
    }
    return b;
}

}  // namespace bemcal
