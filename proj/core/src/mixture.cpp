#include "bemcal/mixture.hpp"

#include "bemcal/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <json.hpp>

namespace bemcal {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Affine map between physical and box-normalized coordinates.
struct BoxScale {
    VectorXd offset;
    VectorXd scale;

    BoxScale(const VectorXd& lower, const VectorXd& upper) : offset(lower.size()), scale(lower.size()) {
        for (Index i = 0; i < lower.size(); ++i) {
            const bool finite = std::isfinite(lower(i)) && std::isfinite(upper(i));
            offset(i)         = std::isfinite(lower(i)) ? lower(i) : 0.0;
            scale(i)          = finite && upper(i) > lower(i) ? upper(i) - lower(i) : 1.0;
        }
    }
};

/// Cholesky factor with escalating ridge for nearly singular matrices.
MatrixXd robust_cholesky(const MatrixXd& cov) {
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    const VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
    const double floor  = std::max(vals.maxCoeff(), 1.0) * 1e-12;
    MatrixXd fixed      = eig.eigenvectors() * (vals.array() + floor).matrix().asDiagonal() *
                     eig.eigenvectors().transpose();
    Eigen::LLT<MatrixXd> again(0.5 * (fixed + fixed.transpose()));
    if (again.info() != Eigen::Success) {
        throw SimulationError("covariance is not positive definite");
    }
    return again.matrixL();
}

struct GaussianLogPdf {
    VectorXd mean;
    MatrixXd chol;
    double log_norm{0.0};

    GaussianLogPdf(const VectorXd& m, const MatrixXd& cov) : mean(m), chol(robust_cholesky(cov)) {
        const double d = static_cast<double>(m.size());
        log_norm       = -0.5 * d * std::log(2.0 * std::numbers::pi) - chol.diagonal().array().log().sum();
    }

    double operator()(const VectorXd& x) const {
        const VectorXd z = chol.triangularView<Eigen::Lower>().solve(x - mean);
        return log_norm - 0.5 * z.squaredNorm();
    }
};

double log_sum_exp(const VectorXd& v) {
    const double mx = v.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((v.array() - mx).exp().sum());
}

struct EmState {
    std::vector<double> weights;
    std::vector<VectorXd> means;
    std::vector<MatrixXd> covs;
};

/// k-means++ style seeding on normalized points.
std::vector<VectorXd> seed_centers(const MatrixXd& u, std::size_t k, std::mt19937_64& rng) {
    const Index n = u.rows();
    std::vector<VectorXd> centers;
    std::uniform_int_distribution<Index> pick(0, n - 1);
    centers.push_back(u.row(pick(rng)).transpose());
    std::vector<double> d2(static_cast<std::size_t>(n));
    while (centers.size() < k) {
        double total = 0.0;
        for (Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, (u.row(i).transpose() - c).squaredNorm());
            d2[static_cast<std::size_t>(i)] = best;
            total += best;
        }
        Index chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> uni(0.0, total);
            double r = uni(rng);
            for (Index i = 0; i < n; ++i) {
                r -= d2[static_cast<std::size_t>(i)];
                chosen = i;
                if (r <= 0.0) break;
            }
        } else {
            chosen = static_cast<Index>(centers.size()) % n;
        }
        centers.push_back(u.row(chosen).transpose());
    }
    return centers;
}

struct EmResult {
    EmState state;
    double log_likelihood{0.0};
    std::vector<double> objective;
};

void m_step(const MatrixXd& u, const MatrixXd& resp, double ridge, EmState& st) {
    const Index n = u.rows();
    const Index d = u.cols();
    const Index k = resp.cols();
    st.weights.assign(static_cast<std::size_t>(k), 0.0);
    st.means.assign(static_cast<std::size_t>(k), VectorXd::Zero(d));
    st.covs.assign(static_cast<std::size_t>(k), MatrixXd::Zero(d, d));
    for (Index c = 0; c < k; ++c) {
        const double nk = std::max(resp.col(c).sum(), 1e-12);
        VectorXd mu     = (u.transpose() * resp.col(c)) / nk;
        MatrixXd s      = MatrixXd::Zero(d, d);
        for (Index i = 0; i < n; ++i) {
            const VectorXd e = u.row(i).transpose() - mu;
            s.noalias() += resp(i, c) * e * e.transpose();
        }
        st.weights[static_cast<std::size_t>(c)] = nk / static_cast<double>(n);
        st.means[static_cast<std::size_t>(c)]   = mu;
        st.covs[static_cast<std::size_t>(c)]    = (s + ridge * MatrixXd::Identity(d, d)) / nk;
    }
}

/// Returns log-likelihood; fills responsibilities.
double e_step(const MatrixXd& u, const EmState& st, MatrixXd& resp, double ridge, double* penalty) {
    const Index n = u.rows();
    const Index k = static_cast<Index>(st.weights.size());
    std::vector<GaussianLogPdf> pdfs;
    pdfs.reserve(static_cast<std::size_t>(k));
    double pen = 0.0;
    for (Index c = 0; c < k; ++c) {
        pdfs.emplace_back(st.means[static_cast<std::size_t>(c)], st.covs[static_cast<std::size_t>(c)]);
        // tr(Sigma^-1) from the Cholesky factor: ||L^-1||_F^2
        const MatrixXd& l = pdfs.back().chol;
        const MatrixXd li = l.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(l.rows(), l.cols()));
        pen += -0.5 * ridge * li.squaredNorm();
    }
    resp.resize(n, k);
    double ll = 0.0;
    VectorXd row(k);
    for (Index i = 0; i < n; ++i) {
        const VectorXd x = u.row(i).transpose();
        for (Index c = 0; c < k; ++c) {
            row(c) = std::log(std::max(st.weights[static_cast<std::size_t>(c)], 1e-300)) + pdfs[static_cast<std::size_t>(c)](x);
        }
        const double lse = log_sum_exp(row);
        ll += lse;
        resp.row(i) = (row.array() - lse).exp().transpose();
    }
    if (penalty) *penalty = pen;
    return ll;
}

EmResult run_em(const MatrixXd& u, std::size_t k, const FitOptions& opt, std::uint64_t seed) {
    const Index n = u.rows();
    std::mt19937_64 rng(seed);
    const auto centers = seed_centers(u, k, rng);
    MatrixXd resp      = MatrixXd::Zero(n, static_cast<Index>(k));
    for (Index i = 0; i < n; ++i) {
        Index best  = 0;
        double bd   = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double dd = (u.row(i).transpose() - centers[c]).squaredNorm();
            if (dd < bd) {
                bd   = dd;
                best = static_cast<Index>(c);
            }
        }
        resp(i, best) = 1.0;
    }
    // Ridge on the scatter matrix: for a single component the covariance gets
    // exactly `jitter` added to its diagonal.
    const double ridge = opt.jitter * static_cast<double>(n) / static_cast<double>(k);
    EmResult res;
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        m_step(u, resp, ridge, res.state);
        double pen      = 0.0;
        const double ll = e_step(u, res.state, resp, ridge, &pen);
        const double obj = ll + pen;
        res.objective.push_back(obj);
        res.log_likelihood = ll;
        if (std::isfinite(prev) && std::abs(obj - prev) <= opt.tolerance * std::max(1.0, std::abs(prev))) {
            break;
        }
        prev = obj;
    }
    return res;
}

}  // namespace

double MixtureModel::log_density(const Eigen::VectorXd& x) const {
    VectorXd terms(static_cast<Index>(components.size()));
    for (std::size_t c = 0; c < components.size(); ++c) {
        const GaussianLogPdf pdf(components[c].mean, components[c].covariance);
        terms(static_cast<Index>(c)) = std::log(std::max(components[c].weight, 1e-300)) + pdf(x);
    }
    return log_sum_exp(terms);
}

bool MixtureModel::inside(const Eigen::VectorXd& x) const {
    for (Index i = 0; i < x.size(); ++i) {
        if (x(i) < lower(i) || x(i) > upper(i)) return false;
    }
    return true;
}

MixtureFit fit_mixture(const Eigen::MatrixXd& points, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                       const FitOptions& options) {
    const Index n = points.rows();
    const Index d = points.cols();
    if (n < 2) {
        throw ValidationError(fmt::format("mixture fit needs at least 2 points, got {}", n));
    }
    if (lower.size() != d || upper.size() != d) {
        throw ValidationError("mixture bounds do not match the point dimension");
    }
    const BoxScale box(lower, upper);
    MatrixXd u(n, d);
    for (Index i = 0; i < n; ++i) {
        u.row(i) = ((points.row(i).transpose() - box.offset).array() / box.scale.array()).transpose();
    }

    MixtureFit fit;
    std::size_t best_k = 0;
    double best_bic    = std::numeric_limits<double>::infinity();
    EmResult best;
    const std::size_t max_k = std::max<std::size_t>(1, options.max_components);
    for (std::size_t k = 1; k <= max_k; ++k) {
        if (k > 1 && static_cast<std::size_t>(n) < k * static_cast<std::size_t>(d + 2)) {
            break;
        }
        auto em         = run_em(u, k, options, options.seed ^ (0x5851f42d4c957f2dULL * k));
        const double kp = static_cast<double>(k);
        const double dd = static_cast<double>(d);
        const double params = (kp - 1.0) + kp * dd + kp * dd * (dd + 1.0) / 2.0;
        // Log-likelihood back in physical units: subtract the log Jacobian.
        const double ll_phys = em.log_likelihood - static_cast<double>(n) * box.scale.array().log().sum();
        const double bic     = -2.0 * ll_phys + params * std::log(static_cast<double>(n));
        fit.bic.push_back(bic);
        if (bic < best_bic) {
            best_bic = bic;
            best_k   = k;
            best     = std::move(em);
            fit.log_likelihood = ll_phys;
        }
    }

    fit.objective = best.objective;
    fit.model.lower = lower;
    fit.model.upper = upper;
    const MatrixXd s = box.scale.asDiagonal();
    for (std::size_t c = 0; c < best_k; ++c) {
        MixtureComponent comp;
        comp.weight     = best.state.weights[c];
        comp.mean       = box.offset + s * best.state.means[c];
        comp.covariance = s * best.state.covs[c] * s;
        fit.model.components.push_back(std::move(comp));
    }
    double wsum = 0.0;
    for (const auto& c : fit.model.components) wsum += c.weight;
    for (auto& c : fit.model.components) c.weight /= wsum;
    return fit;
}

std::string to_json(const MixtureModel& model, const std::vector<std::string>& variable_names) {
    using nlohmann::json;
    auto vec = [](const VectorXd& v) {
        json a = json::array();
        for (Index i = 0; i < v.size(); ++i) {
            a.push_back(std::isfinite(v(i)) ? json(v(i)) : json(v(i) > 0 ? "inf" : "-inf"));
        }
        return a;
    };
    json j;
    j["variables"] = variable_names;
    j["lower"]     = vec(model.lower);
    j["upper"]     = vec(model.upper);
    j["components"] = json::array();
    for (const auto& c : model.components) {
        json cj;
        cj["weight"] = c.weight;
        cj["mean"]   = vec(c.mean);
        json cov     = json::array();
        for (Index r = 0; r < c.covariance.rows(); ++r) cov.push_back(vec(c.covariance.row(r).transpose()));
        cj["covariance"] = cov;
        j["components"].push_back(cj);
    }
    return j.dump(2);
}

MixtureModel mixture_from_json(std::string_view text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("mixture JSON: {}", e.what()));
    }
    auto vec = [](const json& a) {
        VectorXd v(static_cast<Index>(a.size()));
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].is_string()) {
                v(static_cast<Index>(i)) = a[i].get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                           : -std::numeric_limits<double>::infinity();
            } else {
                v(static_cast<Index>(i)) = a[i].get<double>();
            }
        }
        return v;
    };
    MixtureModel m;
    try {
        m.lower = vec(j.at("lower"));
        m.upper = vec(j.at("upper"));
        for (const auto& cj : j.at("components")) {
            MixtureComponent c;
            c.weight     = cj.at("weight").get<double>();
            c.mean       = vec(cj.at("mean"));
            const auto& cov = cj.at("covariance");
            c.covariance.resize(static_cast<Index>(cov.size()), static_cast<Index>(cov.size()));
            for (std::size_t r = 0; r < cov.size(); ++r) c.covariance.row(static_cast<Index>(r)) = vec(cov[r]).transpose();
            m.components.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("mixture JSON: {}", e.what()));
    }
    return m;
}

}  // namespace bemcal
