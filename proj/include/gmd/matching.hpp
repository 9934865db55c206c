#pragma once

#include "gmd/descriptor.hpp"
#include "gmd/parallel.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace gmd {

struct Correspondence {
    int source_keypoint = -1;  // cloud point indices
    int target_keypoint = -1;
    double distance = 0.0;
};

struct MatchDecision {
    std::vector<Correspondence> correspondences;
    double aggregate_distance = std::numeric_limits<double>::infinity();
    bool accepted = false;
    double zeta = std::numeric_limits<double>::quiet_NaN();
    double psi = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// sum_{k,l} wa_k wb_l phi(0 | mua_k - mub_l, cova_k + covb_l)
inline double l2_cross_term(const GMM& a, const GMM& b) {
    double s = 0.0;
    for (int k = 0; k < a.size(); ++k)
        for (int l = 0; l < b.size(); ++l)
            s += a.weights[k] * b.weights[l] *
                 gaussian_pdf(Vec3::Zero(), a.means[k] - b.means[l],
                              a.covariances[k] + b.covariances[l]);
    return s;
}

}  // namespace detail

// Closed-form L2 distance between two mixtures, the analytic value of
// integral (p_a - p_b)^2 dx. Tiny negative round-off is clamped to zero.
inline double l2_distance(const GMM& a, const GMM& b) {
    double d = detail::l2_cross_term(a, a) + detail::l2_cross_term(b, b) -
               2.0 * detail::l2_cross_term(a, b);
    if (d < 0.0 && d > -1e-9) d = 0.0;
    return d;
}

inline double l2_distance(const GMD& a, const GMD& b) { return l2_distance(a.mixture, b.mixture); }

// Pairwise descriptor distances, source rows by target columns.
inline Eigen::MatrixXd descriptor_distance_matrix(const std::vector<GMD>& source,
                                                  const std::vector<GMD>& target,
                                                  int threads = 1) {
    Eigen::MatrixXd dist(source.size(), target.size());
    std::vector<double> self_t(target.size());
    for (std::size_t j = 0; j < target.size(); ++j)
        self_t[j] = detail::l2_cross_term(target[j].mixture, target[j].mixture);
    parallel_for(source.size(), threads, [&](std::size_t i) {
        const double self_s = detail::l2_cross_term(source[i].mixture, source[i].mixture);
        for (std::size_t j = 0; j < target.size(); ++j) {
            double d = self_s + self_t[j] -
                       2.0 * detail::l2_cross_term(source[i].mixture, target[j].mixture);
            if (d < 0.0 && d > -1e-9) d = 0.0;
            dist(i, j) = d;
        }
    });
    return dist;
}

inline double median_distance(const Eigen::MatrixXd& dist) {
    std::vector<double> values(dist.data(), dist.data() + dist.size());
    if (values.empty()) throw std::invalid_argument("median_distance: empty matrix");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    return values[mid];
}

// Candidate pairs below zeta, pruned to mutual nearest neighbors with a
// best/second-best ratio test on both sides. Symmetric in source/target.
inline std::vector<Correspondence> match_descriptors(const Eigen::MatrixXd& dist,
                                                     const std::vector<GMD>& source,
                                                     const std::vector<GMD>& target, double zeta,
                                                     double ratio = 0.9) {
    const int n = static_cast<int>(source.size());
    const int m = static_cast<int>(target.size());
    std::vector<Correspondence> out;
    if (n == 0 || m == 0) return out;

    auto row_best = [&](int i) {
        int best = -1;
        double b1 = std::numeric_limits<double>::infinity(), b2 = b1;
        for (int j = 0; j < m; ++j) {
            const double d = dist(i, j);
            if (d < b1) {
                b2 = b1;
                b1 = d;
                best = j;
            } else if (d < b2) {
                b2 = d;
            }
        }
        return std::tuple<int, double, double>{best, b1, b2};
    };
    auto col_best = [&](int j) {
        int best = -1;
        double b1 = std::numeric_limits<double>::infinity(), b2 = b1;
        for (int i = 0; i < n; ++i) {
            const double d = dist(i, j);
            if (d < b1) {
                b2 = b1;
                b1 = d;
                best = i;
            } else if (d < b2) {
                b2 = d;
            }
        }
        return std::tuple<int, double, double>{best, b1, b2};
    };

    std::vector<std::tuple<int, double, double>> cols(m);
    for (int j = 0; j < m; ++j) cols[j] = col_best(j);

    auto ratio_ok = [&](double best, double second) {
        if (!std::isfinite(second)) return true;  // single candidate
        return best < ratio * std::max(second, 1e-300);
    };

    for (int i = 0; i < n; ++i) {
        const auto [j, b1, b2] = row_best(i);
        if (j < 0 || b1 >= zeta) continue;
        const auto& [ci, c1, c2] = cols[j];
        if (ci != i) continue;  // not mutual
        if (!ratio_ok(b1, b2) || !ratio_ok(c1, c2)) continue;
        out.push_back({source[i].keypoint, target[j].keypoint, b1});
    }
    std::sort(out.begin(), out.end(), [](const Correspondence& a, const Correspondence& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.source_keypoint != b.source_keypoint) return a.source_keypoint < b.source_keypoint;
        return a.target_keypoint < b.target_keypoint;
    });
    return out;
}

inline std::vector<Correspondence> match_descriptors(const std::vector<GMD>& source,
                                                     const std::vector<GMD>& target, double zeta,
                                                     double ratio = 0.9, int threads = 1) {
    if (source.empty() || target.empty()) return {};
    return match_descriptors(descriptor_distance_matrix(source, target, threads), source, target,
                             zeta, ratio);
}

// Surface-pair verdict: mean matched-pair distance against psi, plus a
// minimum correspondence count so RANSAC has something to work with.
inline MatchDecision decide_surface_pair(const std::vector<Correspondence>& correspondences,
                                         double psi, int min_count,
                                         double zeta = std::numeric_limits<double>::quiet_NaN()) {
    MatchDecision d;
    d.correspondences = correspondences;
    d.psi = psi;
    d.zeta = zeta;
    if (!correspondences.empty()) {
        double sum = 0.0;
        for (const auto& c : correspondences) sum += c.distance;
        d.aggregate_distance = sum / static_cast<double>(correspondences.size());
    }
    d.accepted = static_cast<int>(correspondences.size()) >= min_count &&
                 d.aggregate_distance < psi;
    return d;
}

inline void write_correspondences_csv(const std::vector<Correspondence>& corrs,
                                      const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << "source_idx,target_idx,distance\n";
    file << std::setprecision(17);
    for (const auto& c : corrs)
        file << c.source_keypoint << ',' << c.target_keypoint << ',' << c.distance << '\n';
}

inline std::vector<Correspondence> read_correspondences_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<Correspondence> out;
    std::string line;
    std::getline(file, line);  // header
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Correspondence c;
        char comma;
        if (!(ls >> c.source_keypoint >> comma >> c.target_keypoint >> comma >> c.distance))
            throw std::runtime_error("malformed correspondence line: " + line);
        out.push_back(c);
    }
    return out;
}

}  // namespace gmd
