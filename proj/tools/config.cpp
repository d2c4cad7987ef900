#include "config.hpp"

#include "bemcal/error.hpp"
#include "bemcal/synthetic.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>

namespace bemcal::cli {

namespace fs = std::filesystem;
using json   = nlohmann::ordered_json;

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) {
        throw ValidationError(fmt::format("config: '{}' must be an object", where));
    }
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const auto a : allowed) ok = ok || key == a;
        if (!ok) {
            throw ValidationError(fmt::format("config: unknown key '{}{}{}'", where, where.empty() ? "" : ".", key));
        }
    }
}

template <class T>
T get(const json& obj, std::string_view key, std::string_view where, T fallback) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(fmt::format("config: '{}.{}' has the wrong type", where, key));
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::vector<GapSpec> parse_gaps(const json& obj, std::string_view key) {
    std::vector<GapSpec> out;
    for (const auto& g : get<std::vector<std::string>>(obj, key, "synth", {})) out.push_back(GapSpec::parse(g));
    return out;
}

void apply_thresholds(const json& node, std::array<double, 4>& target, std::string_view where) {
    if (node.is_number()) {
        target.fill(node.get<double>());
        return;
    }
    if (!node.is_object()) {
        throw ValidationError(fmt::format("config: '{}' must be a number or a per-channel object", where));
    }
    for (const auto& [key, value] : node.items()) {
        if (!value.is_number()) {
            throw ValidationError(fmt::format("config: '{}.{}' must be a number", where, key));
        }
        target[index(parse_channel(key))] = value.get<double>();
    }
}

}  // namespace

std::vector<Resolution> parse_resolution_list(std::string_view text) {
    std::vector<Resolution> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item  = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (!item.empty()) {
            const auto r = parse_resolution(item);
            if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) {
        throw ValidationError("empty resolution list");
    }
    std::sort(out.begin(), out.end(), [](Resolution a, Resolution b) { return rank(a) < rank(b); });
    return out;
}

RunConfig load_config(const fs::path& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("{}: cannot open config", path.string()));
    }
    std::stringstream text;
    text << in.rdbuf();
    json root;
    try {
        root = json::parse(text.str());
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
    check_keys(root, {"site", "inputs", "bundle", "output", "building", "parameters", "engine", "seed", "resolutions",
                      "prepare", "synth"},
               "");

    RunConfig cfg;
    cfg.source      = path;
    const auto base = path.parent_path().empty() ? fs::current_path() : fs::absolute(path.parent_path());

    if (root.contains("site")) {
        const auto& s = root["site"];
        check_keys(s, {"latitude", "longitude"}, "site");
        cfg.site.latitude  = get(s, "latitude", "site", cfg.site.latitude);
        cfg.site.longitude = get(s, "longitude", "site", cfg.site.longitude);
    }

    const json inputs = root.value("inputs", json::object());
    check_keys(inputs, {"heating", "cooling", "electricity", "dhw", "weather_primary", "weather_secondary"}, "inputs");
    for (const auto c : kAllChannels) {
        cfg.measurements[index(c)] =
            resolve(base, get<std::string>(inputs, name(c), "inputs", fmt::format("data/{}.csv", name(c))));
    }
    cfg.weather_primary   = resolve(base, get<std::string>(inputs, "weather_primary", "inputs", "data/weather_primary.csv"));
    cfg.weather_secondary = resolve(base, get<std::string>(inputs, "weather_secondary", "inputs", "data/weather_secondary.csv"));

    cfg.output = overrides.out ? fs::absolute(*overrides.out)
                               : resolve(base, get<std::string>(root, "output", "", "results"));
    cfg.bundle = root.contains("bundle") ? resolve(base, get<std::string>(root, "bundle", "", ""))
                                         : cfg.output / "bundle";

    if (root.contains("building")) {
        const auto& b = root["building"];
        auto& s       = cfg.building;
        check_keys(b,
                   {"floor_area", "glazed_area", "wall_area", "floor_ceiling_area", "capacitance",
                    "wall_insulation_conductivity", "floor_ceiling_insulation_conductivity",
                    "window_layer_conductivity", "wall_base_resistance", "floor_ceiling_base_resistance",
                    "window_base_resistance", "solar_transmittance", "radiant_time_constant", "max_substep",
                    "dhw_delta_t"},
                   "building");
        s.floor_area                            = get(b, "floor_area", "building", s.floor_area);
        s.glazed_area                           = get(b, "glazed_area", "building", s.glazed_area);
        s.wall_area                             = get(b, "wall_area", "building", s.wall_area);
        s.floor_ceiling_area                    = get(b, "floor_ceiling_area", "building", s.floor_ceiling_area);
        s.capacitance                           = get(b, "capacitance", "building", s.capacitance);
        s.wall_insulation_conductivity          = get(b, "wall_insulation_conductivity", "building", s.wall_insulation_conductivity);
        s.floor_ceiling_insulation_conductivity = get(b, "floor_ceiling_insulation_conductivity", "building",
                                                      s.floor_ceiling_insulation_conductivity);
        s.window_layer_conductivity     = get(b, "window_layer_conductivity", "building", s.window_layer_conductivity);
        s.wall_base_resistance          = get(b, "wall_base_resistance", "building", s.wall_base_resistance);
        s.floor_ceiling_base_resistance = get(b, "floor_ceiling_base_resistance", "building", s.floor_ceiling_base_resistance);
        s.window_base_resistance        = get(b, "window_base_resistance", "building", s.window_base_resistance);
        s.solar_transmittance           = get(b, "solar_transmittance", "building", s.solar_transmittance);
        s.radiant_time_constant         = get(b, "radiant_time_constant", "building", s.radiant_time_constant);
        s.max_substep                   = get(b, "max_substep", "building", s.max_substep);
        s.dhw_delta_t                   = get(b, "dhw_delta_t", "building", s.dhw_delta_t);
    }
    cfg.building.validate();

    if (root.contains("parameters")) {
        for (const auto& [key, range] : root["parameters"].items()) {
            if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number()) {
                throw ValidationError(fmt::format("config: 'parameters.{}' must be [lo, hi]", key));
            }
            cfg.space.set_range(key, range[0].get<double>(), range[1].get<double>());
        }
    }

    cfg.seed = overrides.seed ? *overrides.seed : get<std::uint64_t>(root, "seed", "", cfg.seed);

    if (root.contains("engine")) {
        const auto& e = root["engine"];
        auto& ec      = cfg.engine;
        check_keys(e, {"m", "k", "thresholds", "improvement_tol", "max_iterations", "batch_size", "max_components"},
                   "engine");
        ec.m               = get(e, "m", "engine", ec.m);
        if (e.contains("k")) ec.k = get<std::size_t>(e, "k", "engine", 0);
        ec.improvement_tol = get(e, "improvement_tol", "engine", ec.improvement_tol);
        ec.max_iterations  = get(e, "max_iterations", "engine", ec.max_iterations);
        ec.batch_size      = get(e, "batch_size", "engine", ec.batch_size);
        ec.mixture.max_components = get(e, "max_components", "engine", ec.mixture.max_components);
        if (e.contains("thresholds")) {
            const auto& t = e["thresholds"];
            check_keys(t, {"cvrmse", "nmbe"}, "engine.thresholds");
            if (t.contains("cvrmse")) apply_thresholds(t["cvrmse"], ec.thresholds.cvrmse, "engine.thresholds.cvrmse");
            if (t.contains("nmbe")) apply_thresholds(t["nmbe"], ec.thresholds.nmbe, "engine.thresholds.nmbe");
        }
    }
    if (overrides.jobs) cfg.engine.batch_size = *overrides.jobs;
    cfg.engine.seed = cfg.seed;
    cfg.engine.validate();

    if (overrides.resolutions) {
        cfg.resolutions = parse_resolution_list(*overrides.resolutions);
    } else if (root.contains("resolutions")) {
        const auto& r = root["resolutions"];
        if (r.is_string()) {
            cfg.resolutions = parse_resolution_list(r.get<std::string>());
        } else {
            std::string joined;
            for (const auto& item : get<std::vector<std::string>>(root, "resolutions", "", {})) joined += item + ",";
            cfg.resolutions = parse_resolution_list(joined);
        }
    }

    if (root.contains("prepare")) {
        const auto& p = root["prepare"];
        check_keys(p, {"max_gap_hours", "k_min", "k_max"}, "prepare");
        cfg.prepare.max_gap_seconds =
            static_cast<std::int64_t>(get(p, "max_gap_hours", "prepare", 3.0) * 3600.0);
        cfg.prepare.mining.k_min = get(p, "k_min", "prepare", cfg.prepare.mining.k_min);
        cfg.prepare.mining.k_max = get(p, "k_max", "prepare", cfg.prepare.mining.k_max);
    }
    cfg.prepare.mining.seed  = derive_seed(cfg.seed, 7);
    cfg.prepare.resolutions  = cfg.resolutions;

    auto& sy            = cfg.synth;
    sy.start            = parse_timestamp("2023-01-01T00:00:00Z");
    sy.true_parameters  = reference_parameters();
    if (root.contains("synth")) {
        const auto& s = root["synth"];
        check_keys(s, {"start", "days", "noise", "gaps", "weather_gaps", "signal_seed", "away_fraction",
                       "true_parameters", "weather"},
                   "synth");
        if (s.contains("start")) sy.start = parse_timestamp(get<std::string>(s, "start", "synth", ""));
        sy.days          = get(s, "days", "synth", sy.days);
        sy.noise         = get(s, "noise", "synth", sy.noise);
        sy.gaps          = parse_gaps(s, "gaps");
        sy.weather_gaps  = parse_gaps(s, "weather_gaps");
        sy.signal_seed   = get(s, "signal_seed", "synth", sy.signal_seed);
        sy.away_fraction = get(s, "away_fraction", "synth", sy.away_fraction);
        if (s.contains("weather")) {
            const auto& w = s["weather"];
            check_keys(w, {"mean_temperature", "annual_amplitude", "diurnal_amplitude"}, "synth.weather");
            sy.mean_temperature  = get(w, "mean_temperature", "synth.weather", sy.mean_temperature);
            sy.annual_amplitude  = get(w, "annual_amplitude", "synth.weather", sy.annual_amplitude);
            sy.diurnal_amplitude = get(w, "diurnal_amplitude", "synth.weather", sy.diurnal_amplitude);
        }
        if (s.contains("true_parameters")) {
            for (const auto& [key, value] : s["true_parameters"].items()) {
                if (!value.is_number()) {
                    throw ValidationError(fmt::format("config: 'synth.true_parameters.{}' must be a number", key));
                }
                sy.true_parameters[cfg.space.find(key)] = value.get<double>();
            }
        }
    }

    cfg.effective = root;
    cfg.effective["seed"] = cfg.seed;
    cfg.effective["output"] = cfg.output.string();
    cfg.effective["engine"]["batch_size"] = cfg.engine.batch_size;
    std::string res_list;
    for (const auto r : cfg.resolutions) res_list += fmt::format("{}{}", res_list.empty() ? "" : ",", name(r));
    cfg.effective["resolutions"] = res_list;
    return cfg;
}

}  // namespace bemcal::cli
