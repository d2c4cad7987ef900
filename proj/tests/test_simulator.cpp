#include "bemcal/error.hpp"
#include "bemcal/simulator.hpp"
#include "bemcal/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace bemcal;

namespace {

SimulationContext flat_context(std::size_t steps, Resolution r, double t_out, double schedules = 0.0,
                               double ghi = 0.0) {
    SimulationContext ctx;
    ctx.start               = parse_timestamp("2023-01-01T00:00:00Z");
    ctx.timestep            = r;
    ctx.steps               = steps;
    ctx.outdoor_temperature.assign(steps, t_out);
    ctx.ghi.assign(steps, ghi);
    ctx.occupancy.assign(steps, schedules);
    ctx.lighting.assign(steps, schedules);
    ctx.appliances.assign(steps, schedules);
    ctx.dhw.assign(steps, schedules);
    ctx.infiltration.assign(steps, 1.0);
    return ctx;
}

// Cold nights and warm afternoons with a daily gain cycle.
SimulationContext diurnal_context(std::size_t days) {
    auto ctx = flat_context(days * 24, Resolution::Hourly, 0.0);
    for (std::size_t i = 0; i < ctx.steps; ++i) {
        const double h             = static_cast<double>(i % 24);
        const bool day             = h >= 8 && h < 18;
        ctx.outdoor_temperature[i] = 4.0 - 12.0 * std::cos(2.0 * M_PI * (h - 3.0) / 24.0) + 0.3 * (i / 24);
        ctx.ghi[i]                 = day ? 700.0 * std::sin(M_PI * (h - 8.0) / 10.0) : 0.0;
        ctx.occupancy[i]           = day ? 0.3 : 1.0;
        ctx.lighting[i]            = day ? 0.0 : 0.3;
        ctx.appliances[i]          = day ? 0.05 : 0.15;
        ctx.dhw[i]                 = (h == 7 || h == 20) ? 1.0 : 0.05;
        ctx.infiltration[i]        = 1.0;
    }
    return ctx;
}

double total(const MeteredSeries& s) { return std::accumulate(s.values().begin(), s.values().end(), 0.0); }

}  // namespace

TEST(Simulator, EquilibriumProducesNoEnergy) {
    const auto p   = reference_parameters();
    const auto out = simulate(p, flat_context(48, Resolution::Hourly, p[Param::HeatingSetpoint]));
    for (const auto c : kAllChannels) EXPECT_EQ(total(out[c]), 0.0) << name(c);
}

TEST(Simulator, DhwHandOracle) {
    auto p                = reference_parameters();
    p[Param::DhwPeakFlow] = 1e-5;
    const auto out        = simulate(p, flat_context(1, Resolution::Hourly, 21.0, 1.0));
    EXPECT_NEAR(out[Channel::DHW].value(0), 1e-5 * 1000.0 * 4186.0 * 35.0 * 3600.0 / 3.6e6, 1e-12);
    EXPECT_NEAR(out[Channel::DHW].value(0), 1.465, 1e-3);
}

TEST(Simulator, SteadyStateHeating) {
    auto p                    = reference_parameters();
    p[Param::HeatingSetpoint] = 20.0;
    const BuildingSpec spec;
    const auto out = simulate(p, flat_context(24, Resolution::Hourly, 0.0));
    const double w = (envelope_conductance(spec, p) + air_conductance(spec, p)) * 20.0;
    for (std::size_t i = 0; i < 24; ++i) {
        EXPECT_NEAR(out[Channel::Heating].value(i), w * 3600.0 / 3.6e6, 1e-9);
        EXPECT_EQ(out[Channel::Cooling].value(i), 0.0);
    }
}

TEST(Simulator, ElectricityHandOracle) {
    const auto p   = reference_parameters();
    const auto out = simulate(p, flat_context(2, Resolution::Min15, 21.0, 0.5));
    const double w = (p[Param::ApplianceDensity] + p[Param::LightingDensity]) * BuildingSpec{}.floor_area * 0.5;
    EXPECT_NEAR(out[Channel::Electricity].value(1), w * 900.0 / 3.6e6, 1e-12);
}

TEST(Simulator, ComplementarityAndNonNegativity) {
    const auto out = simulate(reference_parameters(), diurnal_context(60));
    double heat = 0.0, cool = 0.0;
    for (std::size_t i = 0; i < out[Channel::Heating].size(); ++i) {
        for (const auto c : kAllChannels) EXPECT_GE(out[c].value(i), 0.0);
        EXPECT_EQ(out[Channel::Heating].value(i) * out[Channel::Cooling].value(i), 0.0);
        heat += out[Channel::Heating].value(i);
        cool += out[Channel::Cooling].value(i);
    }
    EXPECT_GT(heat, 0.0);
    EXPECT_GT(cool, 0.0);
}

TEST(Simulator, Deterministic) {
    const auto ctx = diurnal_context(10);
    const auto a   = simulate(reference_parameters(), ctx);
    const auto b   = simulate(reference_parameters(), ctx);
    for (const auto c : kAllChannels) EXPECT_EQ(a[c].values(), b[c].values());
    EXPECT_EQ(a.zone_temperature, b.zone_temperature);
}

TEST(Simulator, MonotonicityProbes) {
    const auto ctx  = diurnal_context(60);
    const auto base = reference_parameters();
    double previous = std::numeric_limits<double>::infinity();
    for (const double wall : {0.05, 0.06, 0.07, 0.08, 0.09, 0.10}) {
        auto p                   = base;
        p[Param::WallInsulation] = wall;
        const double heat        = total(simulate(p, ctx)[Channel::Heating]);
        EXPECT_LE(heat, previous);
        previous = heat;
    }
    previous = 0.0;
    for (const double hsp : {18.0, 19.5, 21.0, 22.5, 24.0}) {
        auto p                    = base;
        p[Param::HeatingSetpoint] = hsp;
        const double heat         = total(simulate(p, ctx)[Channel::Heating]);
        EXPECT_GE(heat, previous);
        previous = heat;
    }
}

TEST(Simulator, EnergyBalanceCloses) {
    const auto ctx = diurnal_context(30);
    const LumpedZoneSimulator sim;
    const auto out = sim.run(reference_parameters(), ctx, RunOptions{true});
    const auto& t  = out.zone_temperature;
    // window between two steps that end on the same clamped temperature
    std::size_t first = 0, last = 0;
    for (std::size_t i = 0; i < t.size() && last == 0; ++i) {
        for (std::size_t j = t.size() - 1; j > i + 48; --j) {
            if (t[i] == t[j]) {
                first = i;
                last  = j;
                break;
            }
        }
    }
    ASSERT_GT(last, first);
    double q = 0.0, gains = 0.0, losses = 0.0;
    for (std::size_t i = first + 1; i <= last; ++i) {
        q += out.balance.ideal_load[i];
        gains += out.balance.gains[i];
        losses += out.balance.losses[i];
    }
    EXPECT_NEAR(q + gains, losses, 1e-6 * losses);
}

TEST(Simulator, Separability) {
    const auto ctx  = diurnal_context(14);
    const auto base = simulate(reference_parameters(), ctx);
    for (const auto param : {Param::OccupantGain, Param::ApplianceRadiantFraction, Param::VentilationRate,
                             Param::InfiltrationRate, Param::HeatingSetpoint, Param::CoolingSetpoint,
                             Param::GlassDirtFactor, Param::WallInsulation, Param::FloorCeilingInsulation,
                             Param::WindowInsulation}) {
        auto p                  = reference_parameters();
        const auto& var         = ParameterSpace::building_defaults()[param];
        p[param]                = param == Param::HeatingSetpoint ? var.lo : var.hi;
        const auto out          = simulate(p, ctx);
        EXPECT_EQ(out[Channel::Electricity].values(), base[Channel::Electricity].values()) << var.name;
        EXPECT_EQ(out[Channel::DHW].values(), base[Channel::DHW].values()) << var.name;
    }
    auto p                     = reference_parameters();
    p[Param::ApplianceDensity] = 40.0;
    p[Param::LightingDensity]  = 4.0;
    EXPECT_EQ(simulate(p, ctx)[Channel::DHW].values(), base[Channel::DHW].values());
}

TEST(Simulator, Preconditions) {
    auto p = reference_parameters();
    p[Param::HeatingSetpoint] = 24.0;
    p[Param::CoolingSetpoint] = 24.0;
    EXPECT_NO_THROW(simulate(p, flat_context(2, Resolution::Hourly, 0.0)));
    p[Param::WallInsulation] = 0.2;
    EXPECT_THROW(simulate(p, flat_context(2, Resolution::Hourly, 0.0)), ValidationError);

    BuildingSpec bad;
    bad.floor_area = 0.0;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(PostAggregate, ConservesEnergy) {
    const auto out = simulate(reference_parameters(), diurnal_context(31));
    const auto h6  = post_aggregate(out, Resolution::Hour6);
    const auto day = post_aggregate(out, Resolution::Daily);
    for (const auto c : kAllChannels) {
        EXPECT_NEAR(total(h6[c]), total(out[c]), 1e-9 * std::max(1.0, total(out[c])));
        EXPECT_NEAR(total(day[c]), total(out[c]), 1e-9 * std::max(1.0, total(out[c])));
        EXPECT_EQ(day[c].size(), 31u);
    }
    auto p                    = reference_parameters();
    const auto ones           = simulate(p, flat_context(12, Resolution::Hourly, 21.0, 1.0));
    const double hourly_dhw   = ones[Channel::DHW].value(0);
    EXPECT_NEAR(post_aggregate(ones, Resolution::Hour6)[Channel::DHW].value(1), 6.0 * hourly_dhw, 1e-12);
    EXPECT_THROW(post_aggregate(out, Resolution::Min30), ValidationError);
    EXPECT_THROW(post_aggregate(post_aggregate(out, Resolution::Daily), Resolution::Monthly), ValidationError);
}

TEST(GapSpec, Parses) {
    EXPECT_EQ(GapSpec::parse("1x4h").duration_seconds, 4 * 3600);
    EXPECT_EQ(GapSpec::parse("3x30min").count, 3u);
    EXPECT_EQ(GapSpec::parse("2\xc3\x97" "1d").duration_seconds, 86400);
    EXPECT_THROW(GapSpec::parse("4h"), ValidationError);
    EXPECT_THROW(GapSpec::parse("1x4y"), ValidationError);
}

TEST(GroundTruth, ZeroNoiseEqualsSimulation) {
    const auto ctx   = flat_context(600, Resolution::Min1, 5.0, 0.7, 200.0);
    const LumpedZoneSimulator sim;
    const auto truth = synthesize_ground_truth(sim, reference_parameters(), ctx, GroundTruthOptions{0.0, {}, 3});
    const auto out   = sim.run(reference_parameters(), ctx);
    for (const auto c : kAllChannels) {
        EXPECT_EQ(truth[index(c)].values(), out[c].values());
        EXPECT_EQ(truth[index(c)].missing_count(), 0u);
    }
}

TEST(GroundTruth, NoiseMomentAndGapBookkeeping) {
    const std::size_t n = 100000;
    const auto ctx      = flat_context(n, Resolution::Min1, 5.0, 1.0);
    const LumpedZoneSimulator sim;
    GroundTruthOptions opt{0.05, {GapSpec::parse("1x4h")}, 17};
    const auto truth = synthesize_ground_truth(sim, reference_parameters(), ctx, opt);
    const auto clean = sim.run(reference_parameters(), ctx);

    const auto& noisy = truth[index(Channel::Electricity)];
    double sum = 0.0, sq = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (noisy.is_missing(i)) continue;
        ++used;
        const double r = noisy.value(i) / clean[Channel::Electricity].value(i) - 1.0;
        sum += r;
        sq += r * r;
    }
    const double mean = sum / used;
    const double sd   = std::sqrt(sq / used - mean * mean);
    EXPECT_NEAR(sd, 0.05, 0.002);
    EXPECT_NEAR(mean, 0.0, 0.002);

    for (const auto c : kAllChannels) {
        const auto& miss = truth[index(c)].missing();
        std::size_t runs = 0, cells = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (miss[i]) ++cells;
            if (miss[i] && (i == 0 || !miss[i - 1])) ++runs;
        }
        EXPECT_EQ(runs, 1u) << name(c);
        EXPECT_EQ(cells, 240u) << name(c);
    }

    const auto again = synthesize_ground_truth(sim, reference_parameters(), ctx, opt);
    EXPECT_EQ(again[index(Channel::DHW)].missing(), truth[index(Channel::DHW)].missing());
    for (std::size_t i = 0; i < n; ++i) {
        if (!truth[index(Channel::DHW)].is_missing(i)) {
            ASSERT_EQ(again[index(Channel::DHW)].value(i), truth[index(Channel::DHW)].value(i));
        }
    }
}

TEST(Context, ExpandsSchedulesAndChecksWeather) {
    SyntheticWeatherOptions wopt;
    wopt.start = parse_timestamp("2023-03-01T00:00:00Z");
    wopt.days  = 3;
    wopt.seed  = 1;
    const auto weather = synthetic_weather(wopt);
    const auto hourly  = resample_weather(weather, Resolution::Hourly);
    const auto sched   = nominal_schedules(Resolution::Hourly);
    const auto ctx     = make_context(hourly, sched, Resolution::Hourly);
    EXPECT_EQ(ctx.steps, 72u);
    for (const double v : ctx.infiltration) EXPECT_EQ(v, 1.0);
    EXPECT_THROW(make_context(weather, sched, Resolution::Hourly), ValidationError);
    EXPECT_THROW(make_context(hourly, sched, Resolution::Daily), ValidationError);
}
