#pragma once

#include "gmd/xmeans.hpp"

#include <numeric>

namespace gmd {

struct EmCollapseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GMM {
    std::vector<double> weights;
    std::vector<Vec3> means;
    std::vector<Mat3> covariances;

    int size() const { return static_cast<int>(weights.size()); }

    double weight_sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

// Density of one Gaussian component, D = 3.
inline double gaussian_pdf(const Vec3& x, const Vec3& mu, const Mat3& cov) {
    return std::exp(detail::log_gaussian(x, mu, cov));
}

// Mixture density p(x) = sum_i w_i * phi(x | mu_i, cov_i).
inline double gmm_pdf(const GMM& mixture, const Vec3& x) {
    double p = 0.0;
    for (int i = 0; i < mixture.size(); ++i)
        p += mixture.weights[i] * gaussian_pdf(x, mixture.means[i], mixture.covariances[i]);
    return p;
}

struct EmParams {
    double tau = 1e-6;          // relative log-likelihood change to stop
    int max_iters = 200;
    double cov_floor = 0.0;     // eigenvalue floor applied to every covariance
    double collapse_eps = 1e-6; // component pruned when its soft count drops below
};

struct EMState {
    Eigen::MatrixXd responsibilities;     // N x k, rows sum to 1
    Eigen::VectorXd counts;               // N_k per component
    double log_likelihood = 0.0;
    std::vector<double> history;          // log-likelihood after each iteration
    int iterations = 0;
    int pruned_components = 0;
};

// Expectation-maximization for a 3D Gaussian mixture, initialized from an
// x-means clustering (means = cluster centers, covariances = cluster sample
// variances, weights = cluster point shares). Components whose soft count
// collapses are pruned; losing all of them is an error.
inline std::pair<GMM, EMState> em_fit(const std::vector<Vec3>& pts, const ClusterSet& init,
                                      const EmParams& params = {}) {
    const int n = static_cast<int>(pts.size());
    if (init.k < 1) throw std::invalid_argument("em_fit: empty initialization");
    if (n < 3 * init.k)
        throw std::invalid_argument("em_fit: need at least 3 points per component");
    for (int a = 0; a < init.k; ++a)
        for (int b = a + 1; b < init.k; ++b)
            if ((init.centers[a] - init.centers[b]).norm() == 0.0)
                throw std::invalid_argument("em_fit: duplicate initial centers");

    GMM model;
    for (int c = 0; c < init.k; ++c) {
        model.weights.push_back(static_cast<double>(init.counts[c]) / static_cast<double>(n));
        model.means.push_back(init.centers[c]);
        model.covariances.push_back(
            detail::floored_covariance(init.covariances[c], std::max(params.cov_floor, 1e-12)));
    }

    EMState state;
    Eigen::MatrixXd log_resp(n, model.size());
    double prev_log_l = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < params.max_iters; ++iter) {
        // E step
        log_resp.resize(n, model.size());
        double log_l = 0.0;
        for (int i = 0; i < n; ++i) {
            double row_max = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < model.size(); ++c) {
                log_resp(i, c) = std::log(std::max(model.weights[c], 1e-300)) +
                                 detail::log_gaussian(pts[i], model.means[c],
                                                      model.covariances[c]);
                row_max = std::max(row_max, log_resp(i, c));
            }
            double sum = 0.0;
            for (int c = 0; c < model.size(); ++c) sum += std::exp(log_resp(i, c) - row_max);
            const double log_norm = row_max + std::log(sum);
            for (int c = 0; c < model.size(); ++c)
                log_resp(i, c) = std::exp(log_resp(i, c) - log_norm);
            log_l += log_norm;
        }

        // M step (Eqs. for mu, Sigma, w from soft counts)
        Eigen::VectorXd counts = log_resp.colwise().sum();
        std::vector<int> alive;
        for (int c = 0; c < model.size(); ++c)
            if (counts[c] >= params.collapse_eps) alive.push_back(c);
        if (alive.empty()) throw EmCollapseError("em_fit: all components collapsed");
        if (static_cast<int>(alive.size()) < model.size()) {
            state.pruned_components += model.size() - static_cast<int>(alive.size());
            GMM reduced;
            Eigen::MatrixXd resp_reduced(n, alive.size());
            for (std::size_t a = 0; a < alive.size(); ++a) {
                reduced.weights.push_back(model.weights[alive[a]]);
                reduced.means.push_back(model.means[alive[a]]);
                reduced.covariances.push_back(model.covariances[alive[a]]);
                resp_reduced.col(a) = log_resp.col(alive[a]);
            }
            const double wsum = reduced.weight_sum();
            for (auto& w : reduced.weights) w /= wsum;
            model = std::move(reduced);
            log_resp = std::move(resp_reduced);
            counts = log_resp.colwise().sum();
        }

        for (int c = 0; c < model.size(); ++c) {
            Vec3 mu = Vec3::Zero();
            for (int i = 0; i < n; ++i) mu += log_resp(i, c) * pts[i];
            mu /= counts[c];
            Mat3 cov = Mat3::Zero();
            for (int i = 0; i < n; ++i) {
                const Vec3 d = pts[i] - mu;
                cov += log_resp(i, c) * (d * d.transpose());
            }
            cov /= counts[c];
            model.means[c] = mu;
            model.covariances[c] =
                detail::floored_covariance(cov, std::max(params.cov_floor, 1e-12));
            model.weights[c] = counts[c] / static_cast<double>(n);
        }

        state.history.push_back(log_l);
        state.iterations = iter + 1;
        state.log_likelihood = log_l;
        state.counts = counts;
        if (std::abs(log_l - prev_log_l) <= params.tau * (1.0 + std::abs(log_l))) break;
        prev_log_l = log_l;
    }
    state.responsibilities = log_resp;
    return {model, state};
}

}  // namespace gmd
