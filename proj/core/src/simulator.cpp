#include "bemcal/simulator.hpp"

#include "bemcal/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace bemcal {

namespace {

constexpr double kJoulesPerKwh = 3.6e6;

}  // namespace

void BuildingSpec::validate() const {
    const std::array<std::pair<const char*, double>, 16> fields{{
        {"floor_area", floor_area},
        {"glazed_area", glazed_area},
        {"wall_area", wall_area},
        {"floor_ceiling_area", floor_ceiling_area},
        {"capacitance", capacitance},
        {"wall_insulation_conductivity", wall_insulation_conductivity},
        {"floor_ceiling_insulation_conductivity", floor_ceiling_insulation_conductivity},
        {"window_layer_conductivity", window_layer_conductivity},
        {"solar_transmittance", solar_transmittance},
        {"radiant_time_constant", radiant_time_constant},
        {"max_substep", max_substep},
        {"dhw_delta_t", dhw_delta_t},
        {"air_density", air_density},
        {"air_heat_capacity", air_heat_capacity},
        {"water_density", water_density},
        {"water_heat_capacity", water_heat_capacity},
    }};
    for (const auto& [field, value] : fields) {
        if (!(value > 0.0)) {
            throw ValidationError(fmt::format("building spec: {} must be positive", field));
        }
    }
    if (wall_base_resistance < 0.0 || floor_ceiling_base_resistance < 0.0 || window_base_resistance < 0.0) {
        throw ValidationError("building spec: base resistances must be non-negative");
    }
}

double envelope_conductance(const BuildingSpec& spec, const ParameterVector& p) {
    const double wall = spec.wall_area / (spec.wall_base_resistance +
                                          p[Param::WallInsulation] / spec.wall_insulation_conductivity);
    const double slab = spec.floor_ceiling_area /
                        (spec.floor_ceiling_base_resistance +
                         p[Param::FloorCeilingInsulation] / spec.floor_ceiling_insulation_conductivity);
    const double window = spec.glazed_area / (spec.window_base_resistance +
                                              p[Param::WindowInsulation] / spec.window_layer_conductivity);
    return wall + slab + window;
}

double air_conductance(const BuildingSpec& spec, const ParameterVector& p, double infiltration_profile) {
    const double flow =
        (p[Param::VentilationRate] + p[Param::InfiltrationRate] * infiltration_profile) * spec.floor_area;
    return flow * spec.air_density * spec.air_heat_capacity;
}

SimulationContext make_context(const WeatherSeries& weather, const ScheduleSet& schedules, Resolution timestep) {
    if (is_calendar(timestep) || coarser_than(timestep, Resolution::Hourly)) {
        throw ValidationError(fmt::format("simulation step {} is coarser than hourly", name(timestep)));
    }
    if (weather.resolution() != timestep) {
        throw ValidationError(fmt::format("weather is at {} but the simulation step is {}",
                                          name(weather.resolution()), name(timestep)));
    }
    SimulationContext ctx;
    ctx.start    = weather.start();
    ctx.timestep = timestep;
    ctx.steps    = weather.size();
    for (std::size_t i = 0; i < weather.size(); ++i) {
        if (weather.is_missing(WeatherField::DryBulb, i) || weather.is_missing(WeatherField::Ghi, i)) {
            throw ValidationError(fmt::format("simulation weather incomplete at {}",
                                              format_timestamp(weather.time_at(i))));
        }
    }
    ctx.outdoor_temperature = weather.field(WeatherField::DryBulb);
    ctx.ghi                 = weather.field(WeatherField::Ghi);
    const auto step         = step_seconds(timestep);
    ctx.occupancy    = schedules.role(ScheduleRole::Occupancy).expand(ctx.start, ctx.steps, step);
    ctx.lighting     = schedules.role(ScheduleRole::Lighting).expand(ctx.start, ctx.steps, step);
    ctx.appliances   = schedules.role(ScheduleRole::Appliances).expand(ctx.start, ctx.steps, step);
    ctx.dhw          = schedules.role(ScheduleRole::DHW).expand(ctx.start, ctx.steps, step);
    ctx.infiltration = schedules.role(ScheduleRole::Infiltration).expand(ctx.start, ctx.steps, step);
    return ctx;
}

LumpedZoneSimulator::LumpedZoneSimulator(BuildingSpec spec, ParameterSpace space)
    : spec_(spec), space_(std::move(space)) {
    spec_.validate();
    if (space_.size() != kParamCount) {
        throw ValidationError(fmt::format("the lumped-zone model expects {} variables, got {}", kParamCount,
                                          space_.size()));
    }
}

SimulationOutput LumpedZoneSimulator::run(const ParameterVector& p, const SimulationContext& ctx,
                                          const RunOptions& options) const {
    require_within(space_, p);
    const double hsp = p[Param::HeatingSetpoint];
    const double csp = p[Param::CoolingSetpoint];
    if (hsp > csp) {
        throw ValidationError(fmt::format("heating set-point {} above cooling set-point {}", hsp, csp));
    }
    const auto& s      = spec_;
    const double area  = s.floor_area;
    const double ua    = envelope_conductance(s, p);
    const double step  = static_cast<double>(step_seconds(ctx.timestep));
    const auto n_sub   = static_cast<int>(std::ceil(step / s.max_substep - 1e-9));
    const double dt    = step / n_sub;
    const double c     = s.capacitance;
    const double fa    = p[Param::ApplianceRadiantFraction] / 100.0;
    const double fl    = p[Param::LightingRadiantFraction] / 100.0;
    const double app   = p[Param::ApplianceDensity] * area;
    const double light = p[Param::LightingDensity] * area;
    const double occ   = p[Param::OccupantGain] * area;
    const double solar = s.glazed_area * s.solar_transmittance * p[Param::GlassDirtFactor];
    const double dhw_w = p[Param::DhwPeakFlow] * s.water_density * s.water_heat_capacity * s.dhw_delta_t;
    const double lag   = dt / s.radiant_time_constant;

    const std::size_t n = ctx.steps;
    std::vector<double> heat(n), cool(n), elec(n), dhw(n);
    SimulationOutput out;
    out.zone_temperature.resize(n);
    if (options.record_balance) {
        out.balance.ideal_load.assign(n, 0.0);
        out.balance.gains.assign(n, 0.0);
        out.balance.losses.assign(n, 0.0);
    }

    double t_zone    = hsp;
    double rad_state = n > 0 ? (fa * app * ctx.appliances[0] + fl * light * ctx.lighting[0]) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t_out   = ctx.outdoor_temperature[i];
        const double k_total = ua + air_conductance(s, p, ctx.infiltration[i]);
        const double app_w   = app * ctx.appliances[i];
        const double light_w = light * ctx.lighting[i];
        const double conv    = occ * ctx.occupancy[i] + (1.0 - fa) * app_w + (1.0 - fl) * light_w + solar * ctx.ghi[i];
        const double rad_in  = fa * app_w + fl * light_w;
        double q_net = 0.0;
        for (int k = 0; k < n_sub; ++k) {
            const double loss   = k_total * (t_zone - t_out);
            const double gain   = conv + rad_state;
            const double t_free = t_zone + dt / c * (gain - loss);
            const double target = std::clamp(t_free, hsp, csp);
            const double q      = c * (target - t_free) / dt;
            q_net += q * dt;
            if (options.record_balance) {
                out.balance.ideal_load[i] += q * dt;
                out.balance.gains[i] += gain * dt;
                out.balance.losses[i] += loss * dt;
            }
            t_zone = target;
            rad_state += lag * (rad_in - rad_state);
        }
        if (!(std::abs(t_zone) <= 100.0)) {
            throw SimulationError(fmt::format("zone temperature {} degC at step {}: time step too large for the "
                                              "zone capacitance",
                                              t_zone, i));
        }
        out.zone_temperature[i] = t_zone;
        // netted over the sub-steps so heating and cooling never share a step
        heat[i]                 = std::max(q_net, 0.0) / kJoulesPerKwh;
        cool[i]                 = std::max(-q_net, 0.0) / kJoulesPerKwh;
        elec[i]                 = (app_w + light_w) * step / kJoulesPerKwh;
        dhw[i]                  = dhw_w * ctx.dhw[i] * step / kJoulesPerKwh;
    }
    out.channels[index(Channel::Heating)]     = MeteredSeries(Channel::Heating, ctx.start, ctx.timestep, std::move(heat));
    out.channels[index(Channel::Cooling)]     = MeteredSeries(Channel::Cooling, ctx.start, ctx.timestep, std::move(cool));
    out.channels[index(Channel::Electricity)] = MeteredSeries(Channel::Electricity, ctx.start, ctx.timestep, std::move(elec));
    out.channels[index(Channel::DHW)]         = MeteredSeries(Channel::DHW, ctx.start, ctx.timestep, std::move(dhw));
    return out;
}

SimulationOutput simulate(const ParameterVector& params, const SimulationContext& context, const BuildingSpec& spec) {
    return LumpedZoneSimulator(spec).run(params, context);
}

SimulationOutput post_aggregate(const SimulationOutput& out, Resolution target) {
    const auto source = out.channels[0].resolution();
    if (source != Resolution::Hourly) {
        throw ValidationError(fmt::format("post-aggregation expects hourly output, got {}", name(source)));
    }
    if (!coarser_than(target, Resolution::Hourly)) {
        throw ValidationError(fmt::format("post-aggregation target {} must be coarser than hourly", name(target)));
    }
    SimulationOutput agg;
    for (const auto c : kAllChannels) agg.channels[index(c)] = aggregate(out[c], target);
    if (!is_calendar(target)) {
        agg.zone_temperature = resample_intensive(out.zone_temperature, 3600, step_seconds(target));
    }
    return agg;
}

GapSpec GapSpec::parse(std::string_view text) {
    auto sep = text.find('x');
    std::size_t sep_len = 1;
    if (sep == std::string_view::npos) {
        sep     = text.find("\xc3\x97");  // multiplication sign
        sep_len = 2;
    }
    if (sep == std::string_view::npos) {
        throw ValidationError(fmt::format("gap spec '{}' must look like '1x4h'", text));
    }
    GapSpec g;
    const auto count = text.substr(0, sep);
    auto rest        = text.substr(sep + sep_len);
    if (std::from_chars(count.data(), count.data() + count.size(), g.count).ec != std::errc{}) {
        throw ValidationError(fmt::format("gap spec '{}': bad count", text));
    }
    std::int64_t amount = 0;
    const auto res      = std::from_chars(rest.data(), rest.data() + rest.size(), amount);
    if (res.ec != std::errc{} || amount <= 0) {
        throw ValidationError(fmt::format("gap spec '{}': bad duration", text));
    }
    const std::string_view unit(res.ptr, static_cast<std::size_t>(rest.data() + rest.size() - res.ptr));
    if (unit == "h") {
        g.duration_seconds = amount * 3600;
    } else if (unit == "min" || unit == "m") {
        g.duration_seconds = amount * 60;
    } else if (unit == "d") {
        g.duration_seconds = amount * 86400;
    } else {
        throw ValidationError(fmt::format("gap spec '{}': unit must be min, h or d", text));
    }
    return g;
}

std::array<MeteredSeries, 4> synthesize_ground_truth(const Simulator& simulator, const ParameterVector& true_params,
                                                     const SimulationContext& context,
                                                     const GroundTruthOptions& options) {
    if (context.timestep != Resolution::Min1) {
        throw ValidationError("ground truth is synthesized at 1-minute steps");
    }
    if (options.noise_level < 0.0) {
        throw ValidationError("noise level must be non-negative");
    }
    const auto out = simulator.run(true_params, context);
    std::array<MeteredSeries, 4> truth;
    const std::size_t n = context.steps;
    for (const auto c : kAllChannels) {
        std::mt19937_64 rng(derive_seed(options.seed, 100 + index(c)));
        std::normal_distribution<double> normal(0.0, 1.0);
        auto values         = out[c].values();
        const double sigma  = options.noise_level;
        if (sigma > 0.0) {
            for (auto& v : values) v *= std::exp(sigma * normal(rng) - 0.5 * sigma * sigma);
        }
        std::vector<bool> missing(n, false);
        std::vector<bool> reserved(n, false);  // gap cells plus a one-step margin
        for (const auto& gap : options.gaps) {
            const auto len = static_cast<std::size_t>(gap.duration_seconds / 60);
            for (std::size_t g = 0; g < gap.count; ++g) {
                if (len + 2 >= n) {
                    throw ValidationError("gap longer than the series");
                }
                std::uniform_int_distribution<std::size_t> pos(1, n - len - 1);
                bool placed = false;
                for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
                    const auto first = pos(rng);
                    bool clear       = true;
                    for (std::size_t i = first - 1; i <= first + len && clear; ++i) clear = !reserved[i];
                    if (!clear) continue;
                    for (std::size_t i = first - 1; i <= first + len; ++i) reserved[i] = true;
                    for (std::size_t i = first; i < first + len; ++i) missing[i] = true;
                    placed = true;
                }
                if (!placed) {
                    throw ValidationError("could not place all requested gaps without overlap");
                }
            }
        }
        truth[index(c)] = MeteredSeries(c, context.start, Resolution::Min1, std::move(values), std::move(missing));
    }
    return truth;
}

}  // namespace bemcal
