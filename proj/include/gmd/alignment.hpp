#pragma once

#include "gmd/matching.hpp"
#include "gmd/point_cloud.hpp"

#include <fstream>
#include <random>

namespace gmd {

struct AlignmentFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlignmentResult {
    RigidTransform transform;
    std::vector<int> inlier_indices;  // indices into the correspondence list
    double ransac_inlier_ratio = 0.0;
    double icp_final_error = 0.0;  // mean point-to-point distance
    int iterations_used = 0;
    std::vector<double> residual_history;
};

// Least-squares rigid transform (Kabsch, determinant corrected to +1)
// minimizing sum ||R*s_i + t - d_i||^2.
inline RigidTransform estimate_rigid_from_triplets(const std::vector<Vec3>& src,
                                                   const std::vector<Vec3>& dst) {
    if (src.size() != dst.size() || src.size() < 3)
        throw std::invalid_argument("estimate_rigid: need >= 3 paired points");
    const double n = static_cast<double>(src.size());
    Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
    for (const auto& p : src) cs += p;
    for (const auto& p : dst) cd += p;
    cs /= n;
    cd /= n;

    Mat3 h = Mat3::Zero();
    Mat3 scatter = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec3 a = src[i] - cs;
        h += a * (dst[i] - cd).transpose();
        scatter += a * a.transpose();
    }
    Vec3 evals;
    Mat3 evecs;
    symmetric_eigen(scatter, evals, evecs);
    if (evals[1] <= 1e-12 * std::max(evals[2], 1e-300))
        throw AlignmentFailureError("estimate_rigid: collinear sample");

    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    RigidTransform t;
    t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    t.translation = cd - t.rotation * cs;
    return t;
}

// RANSAC over 3-point samples of the correspondence set, scored by inlier
// count under inlier_tol, final model refit on all inliers of the best sample.
inline AlignmentResult ransac_align(const std::vector<Correspondence>& correspondences,
                                    const PointCloud& src, const PointCloud& dst,
                                    double inlier_tol, int max_iters, std::uint64_t seed) {
    const int n = static_cast<int>(correspondences.size());
    if (n < 3) throw AlignmentFailureError("ransac: need >= 3 correspondences");
    if (inlier_tol <= 0.0) throw std::invalid_argument("ransac: inlier_tol must be positive");

    std::vector<Vec3> src_pts(n), dst_pts(n);
    for (int i = 0; i < n; ++i) {
        src_pts[i] = src[correspondences[i].source_keypoint].position;
        dst_pts[i] = dst[correspondences[i].target_keypoint].position;
    }

    std::mt19937_64 rng(seed);
    auto draw = [&](int bound) { return static_cast<int>(rng() % bound); };

    std::vector<int> best_inliers;
    double best_residual = std::numeric_limits<double>::infinity();
    std::vector<Vec3> sample_src(3), sample_dst(3);

    for (int iter = 0; iter < max_iters; ++iter) {
        int a = draw(n), b = draw(n), c = draw(n);
        if (a == b || a == c || b == c) continue;
        sample_src = {src_pts[a], src_pts[b], src_pts[c]};
        sample_dst = {dst_pts[a], dst_pts[b], dst_pts[c]};
        RigidTransform t;
        try {
            t = estimate_rigid_from_triplets(sample_src, sample_dst);
        } catch (const AlignmentFailureError&) {
            continue;  // collinear sample, resample
        }
        std::vector<int> inliers;
        double residual_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = (t.apply(src_pts[i]) - dst_pts[i]).norm();
            if (r < inlier_tol) {
                inliers.push_back(i);
                residual_sum += r;
            }
        }
        if (inliers.size() < 3) continue;
        const double mean_residual = residual_sum / static_cast<double>(inliers.size());
        if (inliers.size() > best_inliers.size() ||
            (inliers.size() == best_inliers.size() && mean_residual < best_residual)) {
            best_inliers = std::move(inliers);
            best_residual = mean_residual;
        }
    }
    if (best_inliers.size() < 3) throw AlignmentFailureError("ransac: no consistent model found");

    std::vector<Vec3> in_src, in_dst;
    in_src.reserve(best_inliers.size());
    in_dst.reserve(best_inliers.size());
    for (int i : best_inliers) {
        in_src.push_back(src_pts[i]);
        in_dst.push_back(dst_pts[i]);
    }
    AlignmentResult out;
    out.transform = estimate_rigid_from_triplets(in_src, in_dst);
    out.inlier_indices = std::move(best_inliers);
    out.ransac_inlier_ratio = static_cast<double>(out.inlier_indices.size()) / n;
    out.iterations_used = max_iters;
    double residual_sum = 0.0;
    for (std::size_t i = 0; i < in_src.size(); ++i)
        residual_sum += (out.transform.apply(in_src[i]) - in_dst[i]).norm();
    out.icp_final_error = residual_sum / static_cast<double>(in_src.size());
    return out;
}

// Point-to-point ICP on the full surfaces: nearest-neighbor correspondences
// capped at max_corr_dist, rigid refit, until the mean residual settles.
inline AlignmentResult icp_refine(const PointCloud& src, const PointCloud& dst,
                                  const RigidTransform& init, double max_corr_dist, int max_iters,
                                  double eps, int threads = 1) {
    if (!init.is_valid()) throw std::invalid_argument("icp: invalid initial transform");
    if (max_corr_dist <= 0.0) throw std::invalid_argument("icp: max_corr_dist must be positive");
    const KdTree dst_tree(dst.positions());
    const auto src_pts = src.positions();

    AlignmentResult out;
    out.transform = init;
    double prev_residual = std::numeric_limits<double>::infinity();

    std::vector<int> nn(src_pts.size());
    std::vector<double> nn_dist(src_pts.size());
    for (int iter = 0; iter < max_iters; ++iter) {
        const RigidTransform current = out.transform;
        parallel_for(src_pts.size(), threads, [&](std::size_t i) {
            const Vec3 moved = current.apply(src_pts[i]);
            const int j = dst_tree.nearest(moved);
            nn[i] = j;
            nn_dist[i] = (dst[j].position - moved).norm();
        });
        std::vector<Vec3> pair_src, pair_dst;
        for (std::size_t i = 0; i < src_pts.size(); ++i) {
            if (nn_dist[i] < max_corr_dist) {
                pair_src.push_back(src_pts[i]);
                pair_dst.push_back(dst[nn[i]].position);
            }
        }
        if (pair_src.size() < 3) {
            if (iter == 0) throw AlignmentFailureError("icp: no correspondences at init");
            break;
        }
        out.transform = estimate_rigid_from_triplets(pair_src, pair_dst);
        double residual = 0.0;
        for (std::size_t i = 0; i < pair_src.size(); ++i)
            residual += (out.transform.apply(pair_src[i]) - pair_dst[i]).norm();
        residual /= static_cast<double>(pair_src.size());
        out.residual_history.push_back(residual);
        out.iterations_used = iter + 1;
        out.icp_final_error = residual;
        if (std::abs(prev_residual - residual) < eps) break;
        prev_residual = residual;
    }
    return out;
}

// 4x4 row-major transform as 16 whitespace-separated decimals.
inline void write_transform(const RigidTransform& t, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << std::setprecision(17);
    const Mat4 m = t.matrix();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) file << m(r, c) << (c == 3 ? '\n' : ' ');
    }
}

inline RigidTransform read_transform(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open '" + path + "'");
    Mat4 m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (!(file >> m(r, c)))
                throw std::runtime_error("'" + path + "' is not a 4x4 transform");
    return RigidTransform::from_matrix(m);
}

}  // namespace gmd
