#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace bemcal {

struct MixtureComponent {
    double weight{1.0};
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Gaussian mixture with full covariances, truncated to the box
/// [lower, upper]. Bounds may be infinite.
struct MixtureModel {
    std::vector<MixtureComponent> components;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    std::size_t dimension() const { return static_cast<std::size_t>(lower.size()); }
    std::size_t size() const { return components.size(); }

    /// Untruncated mixture log density.
    double log_density(const Eigen::VectorXd& x) const;

    bool inside(const Eigen::VectorXd& x) const;
};

struct FitOptions {
    std::size_t max_components{3};
    std::size_t max_iterations{200};
    double tolerance{1e-8};  ///< relative change of the EM objective
    double jitter{1e-6};     ///< covariance ridge, in units of squared box width
    std::uint64_t seed{0};
};

struct MixtureFit {
    MixtureModel model;
    std::vector<double> bic;        ///< per candidate component count (1-based position)
    std::vector<double> objective;  ///< EM objective per iteration for the selected count
    double log_likelihood{0.0};
};

/// Fits a Gaussian mixture to the rows of `points` by EM, selecting the
/// component count in 1..max_components by BIC. A count is only tried when
/// there are at least (dim + 2) points per component. Fitting happens in
/// box-normalized coordinates; the covariance ridge acts as an
/// inverse-Wishart-style penalty so the penalized objective is monotone.
/// Needs at least two points.
MixtureFit fit_mixture(const Eigen::MatrixXd& points, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                       const FitOptions& options);

/// JSON text: {"lower": [...], "upper": [...], "variables": [...],
/// "components": [{"weight": w, "mean": [...], "covariance": [[...], ...]}]}.
std::string to_json(const MixtureModel& model, const std::vector<std::string>& variable_names = {});
MixtureModel mixture_from_json(std::string_view text);

}  // namespace bemcal
