#pragma once

#include "gmd/point_cloud.hpp"

#include <deque>
#include <optional>

namespace gmd {

struct ClusterSet {
    int k = 0;
    std::vector<Vec3> centers;
    std::vector<int> assignments;        // point -> cluster
    std::vector<Mat3> covariances;       // MLE sample covariance per cluster
    std::vector<int> counts;
};

struct XMeansParams {
    int k_max = 8;
    std::uint64_t seed = 0;
    int refine_iters = 10;      // Lloyd iterations per trial split
    double var_floor = 0.0;     // eigenvalue floor for BIC likelihoods; <=0 = auto
};

namespace detail {

struct ClusterStats {
    Vec3 mean = Vec3::Zero();
    Mat3 cov = Mat3::Zero();
};

inline ClusterStats cluster_stats(const std::vector<Vec3>& pts, const std::vector<int>& idx) {
    ClusterStats s;
    for (int i : idx) s.mean += pts[i];
    s.mean /= static_cast<double>(idx.size());
    for (int i : idx) {
        const Vec3 d = pts[i] - s.mean;
        s.cov += d * d.transpose();
    }
    s.cov /= static_cast<double>(idx.size());
    return s;
}

inline Mat3 floored_covariance(const Mat3& cov, double eigen_floor) {
    Vec3 evals;
    Mat3 evecs;
    symmetric_eigen(cov, evals, evecs);
    if (evals[0] >= eigen_floor) return cov;
    for (int i = 0; i < 3; ++i) evals[i] = std::max(evals[i], eigen_floor);
    return evecs * evals.asDiagonal() * evecs.transpose();
}

inline double log_gaussian(const Vec3& x, const Vec3& mu, const Mat3& cov) {
    Eigen::LLT<Mat3> llt(cov);
    if (llt.info() != Eigen::Success) {
        // repaired once; callers floor covariances beforehand
        llt.compute(floored_covariance(cov, 1e-12));
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("log_gaussian: covariance not positive definite");
    }
    const Mat3 l = llt.matrixL();
    const Vec3 s = l.triangularView<Eigen::Lower>().solve(x - mu);
    const double log_det = 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)) + std::log(l(2, 2)));
    return -0.5 * (s.squaredNorm() + log_det + 3.0 * std::log(2.0 * M_PI));
}

// Hard-assignment mixture BIC of one candidate clustering; lower is better.
// Free parameters per component: 1 weight + 3 mean + 6 covariance, minus one
// weight constrained by the sum.
inline double clustering_bic(const std::vector<Vec3>& pts,
                             const std::vector<std::vector<int>>& clusters, double eigen_floor) {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.size();
    double log_l = 0.0;
    for (const auto& c : clusters) {
        const auto stats = cluster_stats(pts, c);
        const Mat3 cov = floored_covariance(stats.cov, eigen_floor);
        const double log_pi = std::log(static_cast<double>(c.size()) / static_cast<double>(n));
        for (int i : c) log_l += log_pi + log_gaussian(pts[i], stats.mean, cov);
    }
    const double k = static_cast<double>(clusters.size());
    const double free_params = k * 10.0 - 1.0;
    return free_params * std::log(static_cast<double>(n)) - 2.0 * log_l;
}

// 2-means refinement seeded along the principal axis of the cluster.
inline std::optional<std::pair<std::vector<int>, std::vector<int>>> try_two_means(
    const std::vector<Vec3>& pts, const std::vector<int>& idx, int iters) {
    if (idx.size() < 4) return std::nullopt;
    const auto stats = cluster_stats(pts, idx);
    Vec3 evals;
    Mat3 evecs;
    symmetric_eigen(stats.cov, evals, evecs);
    const Vec3 offset = evecs.col(2) * std::sqrt(std::max(evals[2], 1e-30));
    Vec3 c1 = stats.mean + offset, c2 = stats.mean - offset;

    std::vector<int> a, b;
    for (int it = 0; it < iters; ++it) {
        a.clear();
        b.clear();
        for (int i : idx) {
            const double d1 = (pts[i] - c1).squaredNorm();
            const double d2 = (pts[i] - c2).squaredNorm();
            (d1 <= d2 ? a : b).push_back(i);
        }
        if (a.empty() || b.empty()) return std::nullopt;
        Vec3 m1 = Vec3::Zero(), m2 = Vec3::Zero();
        for (int i : a) m1 += pts[i];
        for (int i : b) m2 += pts[i];
        m1 /= static_cast<double>(a.size());
        m2 /= static_cast<double>(b.size());
        if ((m1 - c1).norm() < 1e-12 && (m2 - c2).norm() < 1e-12) break;
        c1 = m1;
        c2 = m2;
    }
    // a component needs a handful of points for EM to stay well posed
    if (a.size() < 3 || b.size() < 3) return std::nullopt;
    return std::make_pair(a, b);
}

}  // namespace detail

// BIC-driven x-means: start from one cluster and recursively 2-split while the
// split lowers the BIC, capped at k_max. Deterministic for a given seed (the
// current splitting rule is seed-free, but the seed stays in the interface).
inline ClusterSet run_xmeans(const std::vector<Vec3>& pts, const XMeansParams& params) {
    if (pts.size() < 2) throw std::invalid_argument("run_xmeans: need at least 2 points");
    if (params.k_max < 1) throw std::invalid_argument("run_xmeans: k_max must be >= 1");

    double floor = params.var_floor;
    if (floor <= 0.0) {
        Vec3 lo = pts[0], hi = pts[0];
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const double diag = (hi - lo).norm();
        floor = std::max(1e-12, 1e-6 * diag) * std::max(1e-12, 1e-6 * diag);
    }

    std::vector<int> all(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) all[i] = static_cast<int>(i);

    std::deque<std::vector<int>> queue;
    std::vector<std::vector<int>> final_clusters;
    queue.push_back(std::move(all));
    int total = 1;

    while (!queue.empty()) {
        std::vector<int> current = std::move(queue.front());
        queue.pop_front();
        if (total >= params.k_max) {
            final_clusters.push_back(std::move(current));
            continue;
        }
        auto split = detail::try_two_means(pts, current, params.refine_iters);
        if (!split) {
            final_clusters.push_back(std::move(current));
            continue;
        }
        const double bic_one = detail::clustering_bic(pts, {current}, floor);
        const double bic_two = detail::clustering_bic(pts, {split->first, split->second}, floor);
        if (bic_two < bic_one) {
            queue.push_back(std::move(split->first));
            queue.push_back(std::move(split->second));
            ++total;
        } else {
            final_clusters.push_back(std::move(current));
        }
    }

    ClusterSet out;
    out.k = static_cast<int>(final_clusters.size());
    out.assignments.assign(pts.size(), -1);
    for (int c = 0; c < out.k; ++c) {
        const auto stats = detail::cluster_stats(pts, final_clusters[c]);
        out.centers.push_back(stats.mean);
        out.covariances.push_back(stats.cov);
        out.counts.push_back(static_cast<int>(final_clusters[c].size()));
        for (int i : final_clusters[c]) out.assignments[i] = c;
    }
    return out;
}

}  // namespace gmd
