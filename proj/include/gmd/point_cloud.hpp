#pragma once

#include "gmd/core.hpp"
#include "gmd/kdtree.hpp"
#include "gmd/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <string>
#include <vector>

namespace gmd {

struct Point {
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
    bool has_normal = false;
};

struct PointCloud {
    std::vector<Point> points;
    std::string source_id;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Point& operator[](std::size_t i) const { return points[i]; }
    Point& operator[](std::size_t i) { return points[i]; }

    bool has_normals() const {
        if (points.empty()) return false;
        for (const auto& p : points)
            if (!p.has_normal) return false;
        return true;
    }

    std::vector<Vec3> positions() const {
        std::vector<Vec3> out(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = points[i].position;
        return out;
    }
};

inline Vec3 centroid(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("centroid: empty cloud");
    Vec3 c = Vec3::Zero();
    for (const auto& p : cloud.points) c += p.position;
    return c / static_cast<double>(cloud.size());
}

// Mean nearest-neighbor distance; the length unit for every scale-dependent
// parameter (support radius, tolerances, noise levels).
inline double compute_resolution(const PointCloud& cloud, const KdTree& tree, int threads = 1) {
    const std::size_t m = cloud.size();
    if (m < 2) throw std::invalid_argument("compute_resolution: need at least 2 points");
    std::vector<double> nn(m);
    parallel_for(m, threads, [&](std::size_t i) {
        const int j = tree.nearest_other(cloud[i].position, static_cast<int>(i));
        nn[i] = (cloud[j].position - cloud[i].position).norm();
    });
    double sum = 0.0;
    for (double d : nn) sum += d;
    return sum / static_cast<double>(m);
}

inline double compute_resolution(const PointCloud& cloud, int threads = 1) {
    KdTree tree(cloud.positions());
    return compute_resolution(cloud, tree, threads);
}

inline std::vector<int> radius_search(const KdTree& tree, const Vec3& center, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("radius_search: radius must be positive");
    return tree.radius_indices(center, radius);
}

inline std::vector<int> radius_search(const PointCloud& cloud, const Vec3& center, double radius) {
    KdTree tree(cloud.positions());
    return radius_search(tree, center, radius);
}

inline PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
    PointCloud out = cloud;
    for (auto& p : out.points) {
        p.position = t.apply(p.position);
        if (p.has_normal) p.normal = t.rotate(p.normal);
    }
    return out;
}

// Sorted eigen-decomposition of a symmetric 3x3, eigenvalues ascending.
inline void symmetric_eigen(const Mat3& m, Vec3& eigenvalues, Mat3& eigenvectors) {
    Eigen::SelfAdjointEigenSolver<Mat3> solver(m);
    eigenvalues = solver.eigenvalues();
    eigenvectors = solver.eigenvectors();
}

// Viewpoint used to orient estimated normals when the caller gives none:
// centroid pushed out along the minor PCA axis (the average surface normal
// direction of a slab-like fractured surface). The sign of the offset follows
// the axis component with the largest magnitude so it is reproducible.
inline Vec3 default_viewpoint(const PointCloud& cloud) {
    const Vec3 c = centroid(cloud);
    Mat3 cov = Mat3::Zero();
    for (const auto& p : cloud.points) {
        const Vec3 d = p.position - c;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(cloud.size());
    Vec3 evals;
    Mat3 evecs;
    symmetric_eigen(cov, evals, evecs);
    Vec3 axis = evecs.col(0);  // smallest variance = slab normal
    int imax = 0;
    axis.cwiseAbs().maxCoeff(&imax);
    if (axis[imax] < 0) axis = -axis;
    double extent = std::sqrt(std::max(evals[2], 1e-30));
    return c + axis * (10.0 * extent + 1.0);
}

// PCA normal per point from its k-neighborhood, sign flipped toward the
// viewpoint. Rank-deficient neighborhoods leave the normal unset.
inline PointCloud estimate_normals(const PointCloud& cloud, int k_neighbors, const Vec3& viewpoint,
                                   int threads = 1) {
    if (k_neighbors < 3) throw std::invalid_argument("estimate_normals: k_neighbors must be >= 3");
    if (cloud.size() <= static_cast<std::size_t>(k_neighbors))
        throw std::invalid_argument("estimate_normals: cloud smaller than neighborhood");
    KdTree tree(cloud.positions());
    PointCloud out = cloud;
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        const auto nbrs = tree.k_nearest(cloud[i].position, k_neighbors + 1);
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
        // rank < 2: collinear neighborhood, no stable plane
        if (evals[1] <= 1e-12 * std::max(evals[2], 1e-300)) {
            out[i].has_normal = false;
            out[i].normal = Vec3::Zero();
            return;
        }
        Vec3 n = evecs.col(0).normalized();
        if (n.dot(viewpoint - cloud[i].position) < 0) n = -n;
        out[i].normal = n;
        out[i].has_normal = true;
    });
    return out;
}

inline PointCloud estimate_normals(const PointCloud& cloud, int k_neighbors = 10,
                                   int threads = 1) {
    return estimate_normals(cloud, k_neighbors, default_viewpoint(cloud), threads);
}

}  // namespace gmd
