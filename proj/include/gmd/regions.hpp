#pragma once

#include "gmd/keypoints.hpp"
#include "gmd/point_cloud.hpp"

#include <cstdint>
#include <fstream>

namespace gmd {

struct EdgeExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PlaneFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// +1 convex, -1 concave, one entry per patch point.
using ConcavityLabel = std::vector<std::int8_t>;

enum class ConcavityRule {
    NormalDot,      // Eq.-8 style: sign of point normal against the plane normal
    PlaneDistance,  // experimental: sign of the point-to-plane distance
};

// Boundary test for unorganized points: a point is on the edge when the
// angular span of its projected neighbors leaves a gap wider than max_gap_deg.
inline std::vector<char> edge_point_flags(const std::vector<Vec3>& pts, int k_neighbors = 10,
                                          double max_gap_deg = 90.0) {
    const int n = static_cast<int>(pts.size());
    std::vector<char> flags(n, 0);
    if (n == 0) return flags;
    KdTree tree(pts);
    const double gap_limit = max_gap_deg * M_PI / 180.0;
    for (int i = 0; i < n; ++i) {
        auto nbrs = tree.k_nearest(pts[i], k_neighbors + 1);
        std::erase(nbrs, i);
        if (nbrs.size() < 2) {
            flags[i] = 1;
            continue;
        }
        Vec3 mean = pts[i];
        for (int j : nbrs) mean += pts[j];
        mean /= static_cast<double>(nbrs.size() + 1);
        Mat3 cov = Mat3::Zero();
        {
            const Vec3 d = pts[i] - mean;
            cov += d * d.transpose();
        }
        for (int j : nbrs) {
            const Vec3 d = pts[j] - mean;
            cov += d * d.transpose();
        }
        Vec3 evals;
        Mat3 evecs;
        symmetric_eigen(cov, evals, evecs);
        const Vec3 normal = evecs.col(0);
        // 2D basis of the tangent plane
        int smallest = 0;
        normal.cwiseAbs().minCoeff(&smallest);
        const Vec3 u = (Vec3::Unit(smallest) - normal[smallest] * normal).normalized();
        const Vec3 v = normal.cross(u);

        std::vector<double> angles;
        angles.reserve(nbrs.size());
        for (int j : nbrs) {
            const Vec3 d = pts[j] - pts[i];
            angles.push_back(std::atan2(v.dot(d), u.dot(d)));
        }
        std::sort(angles.begin(), angles.end());
        double max_gap = 2.0 * M_PI - (angles.back() - angles.front());
        for (std::size_t a = 1; a < angles.size(); ++a)
            max_gap = std::max(max_gap, angles[a] - angles[a - 1]);
        if (max_gap > gap_limit) flags[i] = 1;
    }
    return flags;
}

inline std::vector<int> edge_point_local_indices(const std::vector<Vec3>& pts,
                                                 int k_neighbors = 10,
                                                 double max_gap_deg = 90.0) {
    const auto flags = edge_point_flags(pts, k_neighbors, max_gap_deg);
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(flags.size()); ++i)
        if (flags[i]) out.push_back(i);
    if (out.size() < 3)
        throw EdgeExtractionError("edge extraction: found " + std::to_string(out.size()) +
                                  " edge points, need at least 3");
    return out;
}

// Edge points of a patch, returned as indices into the cloud.
inline std::vector<int> extract_edge_points(const PointCloud& cloud, const SurfacePatch& patch,
                                            int k_neighbors = 10, double max_gap_deg = 90.0) {
    std::vector<Vec3> pts;
    pts.reserve(patch.point_indices.size());
    for (int i : patch.point_indices) pts.push_back(cloud[i].position);
    const auto local = edge_point_local_indices(pts, k_neighbors, max_gap_deg);
    std::vector<int> out;
    out.reserve(local.size());
    for (int l : local) out.push_back(patch.point_indices[l]);
    return out;
}

// Whole-surface variant used by the AoNV and PoC metrics.
inline std::vector<int> extract_edge_points(const PointCloud& cloud, int k_neighbors = 10,
                                            double max_gap_deg = 90.0) {
    return edge_point_local_indices(cloud.positions(), k_neighbors, max_gap_deg);
}

// Total-least-squares plane with the normal oriented along orient_like.
inline Plane fit_plane(const std::vector<Vec3>& pts, const Vec3& orient_like) {
    if (pts.size() < 3) throw PlaneFitError("fit_plane: need at least 3 points");
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pts) {
        const Vec3 d = p - c;
        cov += d * d.transpose();
    }
    Vec3 evals;
    Mat3 evecs;
    symmetric_eigen(cov, evals, evecs);
    if (evals[1] <= 1e-12 * std::max(evals[2], 1e-300))
        throw PlaneFitError("fit_plane: collinear points");
    Vec3 n = evecs.col(0).normalized();
    if (n.dot(orient_like) < 0.0) n = -n;
    return Plane{n, -n.dot(c)};
}

inline Plane fit_plane(const PointCloud& cloud, const std::vector<int>& indices,
                       const Vec3& orient_like) {
    std::vector<Vec3> pts;
    pts.reserve(indices.size());
    for (int i : indices) pts.push_back(cloud[i].position);
    return fit_plane(pts, orient_like);
}

inline ConcavityLabel classify_concavity(const std::vector<Vec3>& positions,
                                         const std::vector<Vec3>& normals, const Plane& plane,
                                         ConcavityRule rule = ConcavityRule::NormalDot) {
    if (rule == ConcavityRule::NormalDot && normals.size() != positions.size())
        throw std::invalid_argument("classify_concavity: normals missing");
    ConcavityLabel labels(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double s = rule == ConcavityRule::NormalDot
                             ? normals[i].dot(plane.normal)
                             : plane.signed_distance(positions[i]);
        labels[i] = s >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
    }
    return labels;
}

inline ConcavityLabel classify_concavity(const PointCloud& cloud, const SurfacePatch& patch,
                                         const Plane& plane,
                                         ConcavityRule rule = ConcavityRule::NormalDot) {
    std::vector<Vec3> positions, normals;
    positions.reserve(patch.point_indices.size());
    normals.reserve(patch.point_indices.size());
    for (int i : patch.point_indices) {
        positions.push_back(cloud[i].position);
        if (rule == ConcavityRule::NormalDot && !cloud[i].has_normal)
            throw std::invalid_argument("classify_concavity: point " + std::to_string(i) +
                                        " has no normal");
        if (cloud[i].has_normal) normals.push_back(cloud[i].normal);
    }
    if (rule == ConcavityRule::PlaneDistance) normals.resize(positions.size(), Vec3::Zero());
    return classify_concavity(positions, normals, plane, rule);
}

inline void write_concavity_csv(const std::vector<int>& cloud_indices,
                                const ConcavityLabel& labels, const std::string& path) {
    if (cloud_indices.size() != labels.size())
        throw std::invalid_argument("write_concavity_csv: size mismatch");
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << "point_index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        file << cloud_indices[i] << ',' << static_cast<int>(labels[i]) << '\n';
}

}  // namespace gmd
