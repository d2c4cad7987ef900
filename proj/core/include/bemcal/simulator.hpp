#pragma once

#include "bemcal/parameters.hpp"
#include "bemcal/profiles.hpp"
#include "bemcal/series.hpp"
#include "bemcal/weather.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace bemcal {

/// Fixed geometry and physical constants of the simulated unit. The
/// calibrated variables perturb this reference building.
struct BuildingSpec {
    double floor_area{80.0};           ///< m2
    double glazed_area{15.0};          ///< m2
    double wall_area{60.0};            ///< m2, opaque
    double floor_ceiling_area{160.0};  ///< m2, floor plus ceiling
    double capacitance{8.0e6};         ///< J/K, zone air plus coupled mass

    double wall_insulation_conductivity{0.035};           ///< W/m-K
    double floor_ceiling_insulation_conductivity{0.035};  ///< W/m-K
    double window_layer_conductivity{0.004};              ///< W/m-K
    double wall_base_resistance{0.5};                     ///< m2-K/W
    double floor_ceiling_base_resistance{0.3};            ///< m2-K/W
    double window_base_resistance{0.25};                  ///< m2-K/W

    double solar_transmittance{0.6};      ///< clean glazing
    double radiant_time_constant{7200.0}; ///< s
    double max_substep{360.0};            ///< s

    double dhw_delta_t{35.0};       ///< K, cold inlet to tap
    double air_density{1.2};        ///< kg/m3
    double air_heat_capacity{1005.0};    ///< J/kg-K
    double water_density{1000.0};        ///< kg/m3
    double water_heat_capacity{4186.0};  ///< J/kg-K

    /// Throws ValidationError when a physical quantity is not positive.
    void validate() const;
};

/// Envelope conductance UA (W/K): sum over elements of area / (R_base + t / k).
double envelope_conductance(const BuildingSpec& spec, const ParameterVector& p);

/// Air exchange conductance (W/K) for the given infiltration schedule value.
double air_conductance(const BuildingSpec& spec, const ParameterVector& p, double infiltration_profile = 1.0);

/// Per-step simulation drivers: weather and expanded schedules on the
/// simulation grid. Shared read-only across concurrent runs.
struct SimulationContext {
    Timestamp start{};
    Resolution timestep{Resolution::Hourly};
    std::size_t steps{0};
    std::vector<double> outdoor_temperature;  ///< degC
    std::vector<double> ghi;                  ///< W/m2
    std::vector<double> occupancy;
    std::vector<double> lighting;
    std::vector<double> appliances;
    std::vector<double> dhw;
    std::vector<double> infiltration;
};

/// Builds the drivers. The weather must be complete and at `timestep`
/// (which may not be coarser than hourly); schedules are step-held (or
/// averaged) onto the same grid.
SimulationContext make_context(const WeatherSeries& weather, const ScheduleSet& schedules, Resolution timestep);

/// Energy balance bookkeeping per output step (J).
struct BalanceTrace {
    std::vector<double> ideal_load;  ///< heating positive, cooling negative
    std::vector<double> gains;       ///< solar + internal gains delivered to the zone
    std::vector<double> losses;      ///< transmission + air exchange, positive when the zone loses heat
};

struct SimulationOutput {
    std::array<MeteredSeries, 4> channels;   ///< indexed by Channel
    std::vector<double> zone_temperature;    ///< degC at the end of each step
    BalanceTrace balance;                    ///< filled on request only

    const MeteredSeries& operator[](Channel c) const { return channels[index(c)]; }
};

struct RunOptions {
    bool record_balance{false};
};

/// Black-box model interface. Implementations must be pure: identical inputs
/// give identical outputs, and concurrent calls must be safe. An external
/// simulator can be wired in by implementing this (parameters in, channel
/// series out).
class Simulator {
public:
    virtual ~Simulator() = default;

    virtual SimulationOutput run(const ParameterVector& params, const SimulationContext& context,
                                 const RunOptions& options = {}) const = 0;

    virtual std::string_view name() const = 0;
};

/// Single-node zone with ideal heating/cooling:
///
///   C dT/dt = (UA + H) (T_out - T) + Q_solar + Q_conv + Q_rad,lag + Q_ideal
///
/// Radiant shares of lighting/appliance gains pass through a first-order lag;
/// Q_ideal holds T inside [heating set-point, cooling set-point]. Explicit
/// Euler, sub-stepped to at most `max_substep` seconds.
class LumpedZoneSimulator final : public Simulator {
public:
    explicit LumpedZoneSimulator(BuildingSpec spec = {}, ParameterSpace space = ParameterSpace::building_defaults());

    SimulationOutput run(const ParameterVector& params, const SimulationContext& context,
                         const RunOptions& options = {}) const override;

    std::string_view name() const override { return "lumped-zone"; }

    const BuildingSpec& spec() const { return spec_; }
    const ParameterSpace& space() const { return space_; }

private:
    BuildingSpec spec_;
    ParameterSpace space_;
};

/// Convenience wrapper around LumpedZoneSimulator::run.
SimulationOutput simulate(const ParameterVector& params, const SimulationContext& context,
                          const BuildingSpec& spec = {});

/// Aggregates hourly output to Hour6, Daily or Monthly. The zone temperature
/// trace is averaged for fixed steps and dropped for Monthly.
SimulationOutput post_aggregate(const SimulationOutput& out, Resolution target);

/// A run of identical missing gaps, e.g. "2x4h" or "1x90min".
struct GapSpec {
    std::size_t count{1};
    std::int64_t duration_seconds{3600};

    static GapSpec parse(std::string_view text);
};

struct GroundTruthOptions {
    double noise_level{0.0};  ///< sigma of the mean-one lognormal factor per step
    std::vector<GapSpec> gaps;
    std::uint64_t seed{0};
};

/// Simulates at 1-minute steps, applies independent multiplicative lognormal
/// noise per step and channel, then injects the gaps (same placement rules
/// for every channel, independent positions, never at the series ends).
std::array<MeteredSeries, 4> synthesize_ground_truth(const Simulator& simulator, const ParameterVector& true_params,
                                                     const SimulationContext& context,
                                                     const GroundTruthOptions& options);

}  // namespace bemcal
