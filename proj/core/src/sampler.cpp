#include "bemcal/sampler.hpp"

#include "bemcal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace bemcal {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sqrt_factor(const MatrixXd& cov) {
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

class MixtureDrawer {
public:
    explicit MixtureDrawer(const MixtureModel& model) : model_(model) {
        if (model.components.empty()) {
            throw ValidationError("mixture has no components");
        }
        double acc = 0.0;
        for (const auto& c : model.components) {
            acc += c.weight;
            cumulative_.push_back(acc);
            factors_.push_back(sqrt_factor(c.covariance));
        }
        for (auto& v : cumulative_) v /= acc;
    }

    void draw(std::mt19937_64& rng, VectorXd& out) {
        const double u = uniform_(rng);
        std::size_t c  = 0;
        while (c + 1 < cumulative_.size() && u >= cumulative_[c]) ++c;
        const auto d = model_.components[c].mean.size();
        z_.resize(d);
        for (Index i = 0; i < d; ++i) z_(i) = normal_(rng);
        out = model_.components[c].mean + factors_[c] * z_;
    }

private:
    const MixtureModel& model_;
    std::vector<double> cumulative_;
    std::vector<MatrixXd> factors_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
    VectorXd z_;
};

}  // namespace

Eigen::MatrixXd latin_hypercube(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, std::size_t m,
                                std::uint64_t seed) {
    if (m == 0) {
        throw ValidationError("latin hypercube needs m >= 1");
    }
    const Index d = lower.size();
    MatrixXd out(static_cast<Index>(m), d);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<std::size_t> strata(m);
    for (Index j = 0; j < d; ++j) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        std::shuffle(strata.begin(), strata.end(), rng);
        const double w = upper(j) - lower(j);
        for (std::size_t i = 0; i < m; ++i) {
            const double u = (static_cast<double>(strata[i]) + uni(rng)) / static_cast<double>(m);
            out(static_cast<Index>(i), j) = std::min(lower(j) + u * w, upper(j));
        }
    }
    return out;
}

std::vector<ParameterVector> lhs(const ParameterSpace& space, std::size_t m, std::uint64_t seed) {
    return from_matrix(latin_hypercube(space.lower(), space.upper(), m, seed));
}

Eigen::MatrixXd sample_truncated(const MixtureModel& model, std::size_t m, std::uint64_t seed) {
    MixtureDrawer drawer(model);
    std::mt19937_64 rng(seed);
    MatrixXd out(static_cast<Index>(m), static_cast<Index>(model.dimension()));
    VectorXd x;
    std::size_t accepted = 0;
    std::size_t draws    = 0;
    while (accepted < m) {
        drawer.draw(rng, x);
        ++draws;
        if (model.inside(x)) {
            out.row(static_cast<Index>(accepted++)) = x.transpose();
        }
        if (draws >= kGuardDraws && static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(draws)) {
            throw SimulationError(fmt::format("truncated sampling accepted {} of {} draws; the fitted mixture "
                                              "barely overlaps the plausible ranges",
                                              accepted, draws));
        }
    }
    return out;
}

Eigen::MatrixXd sample_mixture(const MixtureModel& model, std::size_t m, std::uint64_t seed) {
    MixtureDrawer drawer(model);
    std::mt19937_64 rng(seed);
    MatrixXd out(static_cast<Index>(m), static_cast<Index>(model.dimension()));
    VectorXd x;
    for (std::size_t i = 0; i < m; ++i) {
        drawer.draw(rng, x);
        out.row(static_cast<Index>(i)) = x.transpose();
    }
    return out;
}

}  // namespace bemcal
