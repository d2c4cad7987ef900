#include "bemcal/parameters.hpp"

#include "bemcal/error.hpp"

#include <fmt/format.h>

namespace bemcal {

ParameterSpace::ParameterSpace(std::vector<Variable> variables) : vars_(std::move(variables)) {
    for (const auto& v : vars_) {
        if (!(v.lo < v.hi)) {
            throw ValidationError(fmt::format("variable {} has an empty range [{}, {}]", v.name, v.lo, v.hi));
        }
    }
}

ParameterSpace ParameterSpace::building_defaults() {
    return ParameterSpace({
        {"occupant_gain", "W/m2", 0.9, 1.1},
        {"appliance_density", "W/m2", 10.0, 50.0},
        {"lighting_density", "W/m2", 2.0, 5.0},
        {"appliance_radiant_fraction", "%", 20.0, 40.0},
        {"lighting_radiant_fraction", "%", 30.0, 60.0},
        {"ventilation_rate", "m3/s-m2", 3.0e-4, 9.0e-4},
        {"infiltration_rate", "m3/s-m2", 3.0e-5, 9.0e-5},
        {"heating_setpoint", "degC", 18.0, 24.0},
        {"cooling_setpoint", "degC", 24.0, 27.0},
        {"glass_dirt_factor", "-", 0.5, 0.9},
        {"wall_insulation", "m", 0.05, 0.10},
        {"floor_ceiling_insulation", "m", 0.2, 0.4},
        {"window_insulation", "m", 5.0e-4, 1.5e-3},
        {"dhw_peak_flow", "m3/s", 1.0e-5, 1.0e-4},
    });
}

std::size_t ParameterSpace::find(std::string_view name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i].name == name) return i;
    }
    throw ValidationError(fmt::format("unknown variable '{}'", name));
}

void ParameterSpace::set_range(std::string_view name, double lo, double hi) {
    if (!(lo < hi)) {
        throw ValidationError(fmt::format("variable {} has an empty range [{}, {}]", name, lo, hi));
    }
    auto& v = vars_[find(name)];
    v.lo    = lo;
    v.hi    = hi;
}

Eigen::VectorXd ParameterSpace::lower() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vars_.size()));
    for (std::size_t i = 0; i < vars_.size(); ++i) v(static_cast<Eigen::Index>(i)) = vars_[i].lo;
    return v;
}

Eigen::VectorXd ParameterSpace::upper() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vars_.size()));
    for (std::size_t i = 0; i < vars_.size(); ++i) v(static_cast<Eigen::Index>(i)) = vars_[i].hi;
    return v;
}

bool within(const ParameterSpace& space, const ParameterVector& v) {
    if (v.size() != space.size()) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!space[i].contains(v[i])) return false;
    }
    return true;
}

void require_within(const ParameterSpace& space, const ParameterVector& v) {
    if (v.size() != space.size()) {
        throw ValidationError(fmt::format("parameter vector has {} values, space has {}", v.size(), space.size()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!space[i].contains(v[i])) {
            throw ValidationError(fmt::format("{} = {} outside plausible range [{}, {}]", space[i].name, v[i],
                                              space[i].lo, space[i].hi));
        }
    }
}

Eigen::MatrixXd to_matrix(std::span<const ParameterVector> vectors) {
    if (vectors.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(vectors.front().size()));
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        for (std::size_t c = 0; c < vectors[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vectors[r][c];
        }
    }
    return m;
}

std::vector<ParameterVector> from_matrix(const Eigen::MatrixXd& rows) {
    std::vector<ParameterVector> out(static_cast<std::size_t>(rows.rows()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        auto& v = out[static_cast<std::size_t>(r)].values;
        v.resize(static_cast<std::size_t>(rows.cols()));
        for (Eigen::Index c = 0; c < rows.cols(); ++c) v[static_cast<std::size_t>(c)] = rows(r, c);
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z               = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z               = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace bemcal
