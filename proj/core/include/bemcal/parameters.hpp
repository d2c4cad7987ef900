#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace bemcal {

/// Positions of the calibrated variables inside a ParameterVector.
enum class Param : std::uint8_t {
    OccupantGain,            ///< W/m2
    ApplianceDensity,        ///< W/m2
    LightingDensity,         ///< W/m2
    ApplianceRadiantFraction,///< %
    LightingRadiantFraction, ///< %
    VentilationRate,         ///< m3/s per m2 floor
    InfiltrationRate,        ///< m3/s per m2 floor
    HeatingSetpoint,         ///< degC
    CoolingSetpoint,         ///< degC
    GlassDirtFactor,         ///< fraction
    WallInsulation,          ///< m
    FloorCeilingInsulation,  ///< m
    WindowInsulation,        ///< m
    DhwPeakFlow,             ///< m3/s
};

inline constexpr std::size_t kParamCount = 14;

inline constexpr std::size_t index(Param p) { return static_cast<std::size_t>(p); }

struct Variable {
    std::string name;
    std::string unit;
    double lo{0.0};
    double hi{1.0};

    double width() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Plausible ranges of the calibrated variables.
class ParameterSpace {
public:
    ParameterSpace() = default;
    explicit ParameterSpace(std::vector<Variable> variables);

    /// The fourteen building variables with their default plausible ranges.
    /// Wall insulation uses [0.05, 0.10] m.
    static ParameterSpace building_defaults();

    std::size_t size() const { return vars_.size(); }
    const Variable& operator[](std::size_t i) const { return vars_[i]; }
    const Variable& operator[](Param p) const { return vars_[index(p)]; }
    const std::vector<Variable>& variables() const { return vars_; }

    /// Index of the variable named `name`; throws ValidationError if absent.
    std::size_t find(std::string_view name) const;

    /// Replaces one range; throws if lo >= hi.
    void set_range(std::string_view name, double lo, double hi);

    Eigen::VectorXd lower() const;
    Eigen::VectorXd upper() const;

private:
    std::vector<Variable> vars_;
};

/// One candidate value per variable of a ParameterSpace.
struct ParameterVector {
    std::vector<double> values;

    double operator[](Param p) const { return values[index(p)]; }
    double& operator[](Param p) { return values[index(p)]; }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::size_t size() const { return values.size(); }

    bool operator==(const ParameterVector&) const = default;
};

/// True when every value lies inside its range.
bool within(const ParameterSpace& space, const ParameterVector& v);

/// Throws ValidationError naming the first out-of-range variable.
void require_within(const ParameterSpace& space, const ParameterVector& v);

Eigen::MatrixXd to_matrix(std::span<const ParameterVector> vectors);
std::vector<ParameterVector> from_matrix(const Eigen::MatrixXd& rows);

/// SplitMix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace bemcal
