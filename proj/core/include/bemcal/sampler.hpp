#pragma once

#include "bemcal/mixture.hpp"
#include "bemcal/parameters.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bemcal {

/// Latin hypercube design on [lower, upper]: in every dimension each of the m
/// equal-width strata holds exactly one sample, with an independent random
/// stratum order per dimension. Rows are samples.
Eigen::MatrixXd latin_hypercube(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, std::size_t m,
                                std::uint64_t seed);

std::vector<ParameterVector> lhs(const ParameterSpace& space, std::size_t m, std::uint64_t seed);

/// Draws are abandoned when, after this many, the acceptance rate is below
/// kMinAcceptance.
inline constexpr std::size_t kGuardDraws   = 1'000'000;
inline constexpr double kMinAcceptance     = 1e-4;

/// Rejection sampling from the mixture restricted to its box: draw from the
/// untruncated mixture and keep draws inside the box until m are accepted.
/// Throws SimulationError when the acceptance guard trips.
Eigen::MatrixXd sample_truncated(const MixtureModel& model, std::size_t m, std::uint64_t seed);

/// Plain (untruncated) mixture draws.
Eigen::MatrixXd sample_mixture(const MixtureModel& model, std::size_t m, std::uint64_t seed);

}  // namespace bemcal
