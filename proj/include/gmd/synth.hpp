#pragma once

#include "gmd/point_cloud.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace gmd {

// Bumpy heightfield pair with a planted transform. Gaussian bumps give the
// concave/convex structure the descriptor measures, and the analytic gradient
// supplies exact normals.
struct SynthConfig {
    double extent = 10.0;        // square side of the base surface
    double spacing = 0.15;       // grid sampling step (resolution ~ spacing)
    int bumps = 40;
    double bump_amplitude = 0.6;     // max |height| of a bump
    double bump_sigma_min = 0.45;
    double bump_sigma_max = 1.2;
    double jitter = 0.0;             // in-plane jitter, fraction of spacing
    double overlap_fraction = 1.0;   // share of the x extent cloned into B
    RigidTransform transform;        // planted: maps A coordinates into B
    std::uint64_t seed = 0;
};

struct GroundTruth {
    RigidTransform transform;  // source (A) -> target (B)
    std::vector<std::pair<int, int>> keypoint_pairs;  // filled post-detection
    std::vector<std::uint8_t> overlap_mask_src;       // per A point
};

namespace detail {

struct Bump {
    double cx, cy, amplitude, sigma;
};

struct Heightfield {
    std::vector<Bump> bumps;

    double height(double x, double y) const {
        double h = 0.0;
        for (const auto& b : bumps) {
            const double dx = x - b.cx, dy = y - b.cy;
            h += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
        }
        return h;
    }

    Vec3 normal(double x, double y) const {
        double gx = 0.0, gy = 0.0;
        for (const auto& b : bumps) {
            const double dx = x - b.cx, dy = y - b.cy;
            const double g =
                b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
            gx += g * (-dx / (b.sigma * b.sigma));
            gy += g * (-dy / (b.sigma * b.sigma));
        }
        return Vec3(-gx, -gy, 1.0).normalized();
    }
};

inline Heightfield make_heightfield(const SynthConfig& config) {
    std::mt19937_64 rng(mix_seed(config.seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Heightfield field;
    for (int i = 0; i < config.bumps; ++i) {
        Bump b;
        b.cx = unit(rng) * config.extent;
        b.cy = unit(rng) * config.extent;
        const double mag = 0.3 + 0.7 * unit(rng);
        b.amplitude = (i % 2 == 0 ? 1.0 : -1.0) * mag * config.bump_amplitude;
        b.sigma = config.bump_sigma_min +
                  unit(rng) * (config.bump_sigma_max - config.bump_sigma_min);
        field.bumps.push_back(b);
    }
    return field;
}

inline PointCloud sample_heightfield(const Heightfield& field, const SynthConfig& config,
                                     double x_max, std::uint64_t jitter_seed) {
    std::mt19937_64 rng(jitter_seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    const int nx = static_cast<int>(std::floor(x_max / config.spacing)) + 1;
    const int ny = static_cast<int>(std::floor(config.extent / config.spacing)) + 1;
    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double x = ix * config.spacing;
            double y = iy * config.spacing;
            if (config.jitter > 0.0) {
                x += config.jitter * config.spacing * sym(rng);
                y += config.jitter * config.spacing * sym(rng);
            }
            Point p;
            p.position = Vec3(x, y, field.height(x, y));
            p.normal = field.normal(x, y);
            p.has_normal = true;
            cloud.points.push_back(p);
        }
    }
    return cloud;
}

}  // namespace detail

inline std::tuple<PointCloud, PointCloud, GroundTruth> generate_fragment_pair(
    const SynthConfig& config) {
    if (config.extent <= 0.0 || config.spacing <= 0.0 ||
        config.spacing >= config.extent / 4.0)
        throw std::invalid_argument("generate_fragment_pair: degenerate extent/spacing");
    if (config.overlap_fraction <= 0.0 || config.overlap_fraction > 1.0)
        throw std::invalid_argument("generate_fragment_pair: overlap_fraction out of (0,1]");
    if (!config.transform.is_valid())
        throw std::invalid_argument("generate_fragment_pair: invalid planted transform");

    const auto field = detail::make_heightfield(config);
    PointCloud a =
        detail::sample_heightfield(field, config, config.extent, mix_seed(config.seed, 1));
    a.source_id = "synth_a";
    PointCloud b = detail::sample_heightfield(field, config,
                                              config.extent * config.overlap_fraction,
                                              mix_seed(config.seed, 2));
    b = apply_transform(b, config.transform);
    b.source_id = "synth_b";

    GroundTruth gt;
    gt.transform = config.transform;
    gt.overlap_mask_src.resize(a.size());
    const double x_cut = config.extent * config.overlap_fraction + 0.5 * config.spacing;
    for (std::size_t i = 0; i < a.size(); ++i)
        gt.overlap_mask_src[i] = a[i].position.x() <= x_cut ? 1 : 0;
    return {std::move(a), std::move(b), std::move(gt)};
}

// Mutual-nearest keypoint pairs under the ground-truth transform; fills
// GroundTruth::keypoint_pairs for PR-curve evaluation.
inline std::vector<std::pair<int, int>> populate_keypoint_pairs(
    const GroundTruth& gt, const PointCloud& src, const PointCloud& dst,
    const std::vector<int>& src_keypoints, const std::vector<int>& dst_keypoints, double tol) {
    std::vector<std::pair<int, int>> pairs;
    if (src_keypoints.empty() || dst_keypoints.empty()) return pairs;
    std::vector<Vec3> dst_pos;
    dst_pos.reserve(dst_keypoints.size());
    for (int j : dst_keypoints) dst_pos.push_back(dst[j].position);
    const KdTree tree(dst_pos);
    std::vector<Vec3> moved;
    moved.reserve(src_keypoints.size());
    for (int i : src_keypoints) moved.push_back(gt.transform.apply(src[i].position));
    const KdTree src_tree(moved);

    for (std::size_t si = 0; si < src_keypoints.size(); ++si) {
        const int tj = tree.nearest(moved[si]);
        if ((dst_pos[tj] - moved[si]).norm() >= tol) continue;
        if (src_tree.nearest(dst_pos[tj]) != static_cast<int>(si)) continue;  // not mutual
        pairs.emplace_back(src_keypoints[si], dst_keypoints[tj]);
    }
    return pairs;
}

// Per-coordinate iid Gaussian displacement; normals are re-estimated because
// the analytic ones no longer match the perturbed surface.
inline PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, std::uint64_t seed,
                                     int renormal_k = 10, int threads = 1) {
    if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
    if (sigma == 0.0) return cloud;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    PointCloud out = cloud;
    for (auto& p : out.points) {
        p.position.x() += gauss(rng);
        p.position.y() += gauss(rng);
        p.position.z() += gauss(rng);
    }
    return estimate_normals(out, renormal_k, default_viewpoint(out), threads);
}

// Material loss: points inside n random spherical defects are removed. With a
// fixed seed the defect centers for n and n+1 defects are nested, so damage
// grows monotonically with the defect count.
inline PointCloud apply_abrasion(const PointCloud& cloud, int n_defects, double defect_radius,
                                 std::uint64_t seed) {
    if (n_defects < 0) throw std::invalid_argument("apply_abrasion: n_defects must be >= 0");
    if (n_defects == 0) return cloud;
    if (defect_radius <= 0.0)
        throw std::invalid_argument("apply_abrasion: defect_radius must be positive");
    std::mt19937_64 rng(seed);
    const KdTree tree(cloud.positions());
    std::vector<char> removed(cloud.size(), 0);
    for (int d = 0; d < n_defects; ++d) {
        const auto center = static_cast<std::size_t>(rng() % cloud.size());
        for (int i : tree.radius_indices(cloud[center].position, defect_radius)) removed[i] = 1;
    }
    PointCloud out;
    out.source_id = cloud.source_id;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (!removed[i]) out.points.push_back(cloud[i]);
    if (out.empty()) throw std::runtime_error("apply_abrasion: removal emptied the cloud");
    return out;
}

// Uniform random subset of ceil(keep_fraction * M) points, original order kept.
inline PointCloud downsample(const PointCloud& cloud, double keep_fraction, std::uint64_t seed) {
    if (keep_fraction <= 0.0 || keep_fraction > 1.0)
        throw std::invalid_argument("downsample: keep_fraction out of (0,1]");
    const auto target = static_cast<std::size_t>(
        std::ceil(keep_fraction * static_cast<double>(cloud.size())));
    if (target < 2) throw std::runtime_error("downsample: fewer than 2 points would remain");
    std::vector<std::size_t> idx(cloud.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < target; ++i) {
        const std::size_t j = i + rng() % (idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(target);
    std::sort(idx.begin(), idx.end());
    PointCloud out;
    out.source_id = cloud.source_id;
    out.points.reserve(target);
    for (std::size_t i : idx) out.points.push_back(cloud[i]);
    return out;
}

// Ground-truth sidecar: the 4x4 transform followed by key = value lines.
inline void write_ground_truth(const RigidTransform& transform,
                               const std::map<std::string, std::string>& config_echo,
                               const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << std::setprecision(17);
    const Mat4 m = transform.matrix();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) file << m(r, c) << (c == 3 ? '\n' : ' ');
    for (const auto& [k, v] : config_echo) file << k << " = " << v << '\n';
}

inline std::pair<RigidTransform, std::map<std::string, std::string>> read_ground_truth(
    const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open '" + path + "'");
    Mat4 m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (!(file >> m(r, c)))
                throw std::runtime_error("'" + path + "' lacks a 4x4 transform");
    std::string line;
    std::getline(file, line);  // finish the matrix line
    std::map<std::string, std::string> kv;
    while (std::getline(file, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return {RigidTransform::from_matrix(m), kv};
}

}  // namespace gmd
