#pragma once

#include "gmd/point_cloud.hpp"

#include <fstream>
#include <iomanip>
#include <vector>

namespace gmd {

struct InsufficientSupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All points within the support sphere of one feature point.
struct SurfacePatch {
    int center_index = -1;
    std::vector<int> point_indices;  // sorted ascending, contains center
    double radius = 0.0;
};

struct Keypoint {
    int index = -1;
    double response = 0.0;
    double scale = 0.0;
};

// Curvature-DoG detector settings. The fragments carry no color, so the
// scale space runs over a curvature intensity (smallest-eigenvalue ratio of
// the local PCA), which is rigid-invariant.
struct SiftParams {
    double min_scale = 1.0;
    int octaves = 3;
    int scales_per_octave = 4;
    double contrast_threshold = 0.0;
    double nms_radius = 1.0;
    double curvature_radius = 2.0;
};

inline SiftParams default_sift_params(double resolution) {
    SiftParams p;
    p.min_scale = resolution;
    p.nms_radius = resolution;
    p.curvature_radius = 2.0 * resolution;
    return p;
}

namespace detail {

inline std::vector<double> curvature_field(const PointCloud& cloud, const KdTree& tree,
                                           double radius, int threads) {
    std::vector<double> curv(cloud.size(), 0.0);
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        auto nbrs = tree.radius_indices(cloud[i].position, radius);
        if (nbrs.size() < 5) nbrs = tree.k_nearest(cloud[i].position, 6);
        Vec3 mean = Vec3::Zero();
        for (int j : nbrs) mean += cloud[j].position;
        mean /= static_cast<double>(nbrs.size());
        Mat3 cov = Mat3::Zero();
        for (int j : nbrs) {
            const Vec3 d = cloud[j].position - mean;
            cov += d * d.transpose();
        }
        Vec3 evals;
        Mat3 evecs;
        symmetric_eigen(cov, evals, evecs);
        const double total = evals.sum();
        curv[i] = total > 0.0 ? evals[0] / total : 0.0;
    });
    return curv;
}

inline std::vector<double> gaussian_smooth(const PointCloud& cloud, const KdTree& tree,
                                           const std::vector<double>& field, double sigma,
                                           int threads) {
    std::vector<double> out(field.size(), 0.0);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    parallel_for(field.size(), threads, [&](std::size_t i) {
        const auto nbrs = tree.radius_indices(cloud[i].position, 3.0 * sigma);
        double wsum = 0.0, acc = 0.0;
        for (int j : nbrs) {
            const double d2 = (cloud[j].position - cloud[i].position).squaredNorm();
            const double w = std::exp(-d2 * inv2s2);
            wsum += w;
            acc += w * field[j];
        }
        if (wsum <= 0.0) {
            acc = field[i];
            wsum = 1.0;
        }
        out[i] = acc / wsum;
    });
    return out;
}

}  // namespace detail

// Difference-of-Gaussians extrema of the curvature field across a scale
// pyramid, non-maximum suppressed, ordered by response strength descending.
inline std::vector<Keypoint> detect_keypoints(const PointCloud& cloud, const KdTree& tree,
                                              const SiftParams& params, int threads = 1) {
    if (cloud.size() < 10) throw std::invalid_argument("detect_keypoints: cloud too small");
    const int levels = params.scales_per_octave + 3;
    const auto curv = detail::curvature_field(cloud, tree, params.curvature_radius, threads);

    std::vector<Keypoint> candidates;
    for (int octave = 0; octave < params.octaves; ++octave) {
        const double base = params.min_scale * std::pow(2.0, octave);
        std::vector<double> sigmas(levels);
        std::vector<std::vector<double>> smoothed(levels);
        for (int s = 0; s < levels; ++s) {
            sigmas[s] = base * std::pow(2.0, static_cast<double>(s) / params.scales_per_octave);
            smoothed[s] = detail::gaussian_smooth(cloud, tree, curv, sigmas[s], threads);
        }
        std::vector<std::vector<double>> dog(levels - 1);
        for (int s = 0; s + 1 < levels; ++s) {
            dog[s].resize(cloud.size());
            for (std::size_t i = 0; i < cloud.size(); ++i)
                dog[s][i] = smoothed[s + 1][i] - smoothed[s][i];
        }
        for (int l = 1; l + 1 < levels - 1; ++l) {
            const double rho = std::max(sigmas[l], 2.05 * params.min_scale);
            std::vector<char> is_extremum(cloud.size(), 0);
            parallel_for(cloud.size(), threads, [&](std::size_t i) {
                const double v = dog[l][i];
                if (std::abs(v) < params.contrast_threshold) return;
                const auto nbrs = tree.radius_indices(cloud[i].position, rho);
                bool is_max = true, is_min = true;
                for (int j : nbrs) {
                    if (j == static_cast<int>(i)) continue;
                    if (dog[l][j] >= v) is_max = false;
                    if (dog[l][j] <= v) is_min = false;
                }
                for (int dl : {l - 1, l + 1}) {
                    if (dog[dl][i] >= v) is_max = false;
                    if (dog[dl][i] <= v) is_min = false;
                    for (int j : nbrs) {
                        if (j == static_cast<int>(i)) continue;
                        if (dog[dl][j] >= v) is_max = false;
                        if (dog[dl][j] <= v) is_min = false;
                    }
                }
                if (is_max || is_min) is_extremum[i] = 1;
            });
            for (std::size_t i = 0; i < cloud.size(); ++i)
                if (is_extremum[i])
                    candidates.push_back({static_cast<int>(i), std::abs(dog[l][i]), sigmas[l]});
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.index != b.index) return a.index < b.index;
        return a.scale < b.scale;
    });

    // non-maximum suppression, strongest first
    std::vector<Keypoint> kept;
    std::vector<char> seen(cloud.size(), 0);
    for (const auto& cand : candidates) {
        if (seen[cand.index]) continue;
        bool suppressed = false;
        for (const auto& k : kept) {
            if ((cloud[k.index].position - cloud[cand.index].position).norm() <
                params.nms_radius) {
                suppressed = true;
                break;
            }
        }
        seen[cand.index] = 1;
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

inline std::vector<int> keypoint_indices(const std::vector<Keypoint>& kps) {
    std::vector<int> out(kps.size());
    for (std::size_t i = 0; i < kps.size(); ++i) out[i] = kps[i].index;
    return out;
}

// Support patch of a feature point; rejects patches too small to fit a GMM.
inline SurfacePatch extract_patch(const PointCloud& cloud, const KdTree& tree, int center,
                                  double radius, int min_points = 20) {
    if (radius <= 0.0) throw std::invalid_argument("extract_patch: radius must be positive");
    if (center < 0 || center >= static_cast<int>(cloud.size()))
        throw std::invalid_argument("extract_patch: center index out of range");
    SurfacePatch patch;
    patch.center_index = center;
    patch.radius = radius;
    patch.point_indices = tree.radius_indices(cloud[center].position, radius);
    if (static_cast<int>(patch.point_indices.size()) < min_points)
        throw InsufficientSupportError("insufficient support: patch of " +
                                       std::to_string(patch.point_indices.size()) +
                                       " points at keypoint " + std::to_string(center));
    return patch;
}

inline void write_keypoints_csv(const PointCloud& cloud, const std::vector<Keypoint>& kps,
                                const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << "index,x,y,z,response\n";
    file << std::setprecision(17);
    for (const auto& k : kps) {
        const Vec3& p = cloud[k.index].position;
        file << k.index << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << k.response
             << '\n';
    }
}

}  // namespace gmd
