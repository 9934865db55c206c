#pragma once

#include "gmd/keypoints.hpp"
#include "gmd/point_cloud.hpp"

namespace gmd {

struct LrfRankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LrfDegenerateAxisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Orthonormal right-handed frame attached to a feature point. Axes are rows
// of rotation(), so rotation() * (p - origin) gives local coordinates.
struct LRF {
    Vec3 origin = Vec3::Zero();
    Vec3 x_axis = Vec3::UnitX();
    Vec3 y_axis = Vec3::UnitY();
    Vec3 z_axis = Vec3::UnitZ();

    Mat3 rotation() const {
        Mat3 r;
        r.row(0) = x_axis;
        r.row(1) = y_axis;
        r.row(2) = z_axis;
        return r;
    }

    Vec3 to_local(const Vec3& p) const { return rotation() * (p - origin); }
    Vec3 to_local_direction(const Vec3& v) const { return rotation() * v; }
};

// Covariance of the patch about the feature point itself (not the centroid),
// normalized by N-1.
inline Mat3 patch_covariance(const PointCloud& cloud, const SurfacePatch& patch) {
    const Vec3 p = cloud[patch.center_index].position;
    Mat3 cov = Mat3::Zero();
    for (int i : patch.point_indices) {
        const Vec3 d = cloud[i].position - p;
        cov += d * d.transpose();
    }
    const int n = static_cast<int>(patch.point_indices.size());
    if (n < 2) throw LrfRankError("lrf: patch has fewer than 2 points");
    return cov / static_cast<double>(n - 1);
}

// z = minimal-eigenvalue direction of the patch covariance, signed toward the
// summed point-to-feature vector; x = that sum orthogonalized against z;
// y = z cross x. Symmetric patches have no usable x axis and are rejected.
inline LRF compute_lrf(const PointCloud& cloud, const SurfacePatch& patch) {
    const Vec3 p = cloud[patch.center_index].position;
    const Mat3 cov = patch_covariance(cloud, patch);

    Vec3 evals;
    Mat3 evecs;
    symmetric_eigen(cov, evals, evecs);
    if (evals[1] <= 1e-10 * std::max(evals[2], 1e-300))
        throw LrfRankError("lrf: collinear patch at keypoint " +
                           std::to_string(patch.center_index));

    // sum of p_i -> p vectors, i.e. (p - p_i)
    Vec3 toward_center = Vec3::Zero();
    for (int i : patch.point_indices) toward_center += p - cloud[i].position;

    Vec3 z = evecs.col(0).normalized();
    if (z.dot(toward_center) < 0.0) z = -z;

    const double n = static_cast<double>(patch.point_indices.size());
    if (toward_center.norm() <= 1e-9 * n * patch.radius)
        throw LrfDegenerateAxisError("lrf: centro-symmetric patch at keypoint " +
                                     std::to_string(patch.center_index));
    Vec3 x = toward_center - toward_center.dot(z) * z;
    if (x.norm() <= 1e-6 * toward_center.norm())
        throw LrfDegenerateAxisError("lrf: x direction parallel to z at keypoint " +
                                     std::to_string(patch.center_index));
    x.normalize();

    LRF lrf;
    lrf.origin = p;
    lrf.z_axis = z;
    lrf.x_axis = x;
    lrf.y_axis = z.cross(x);
    return lrf;
}

// Patch coordinates expressed in the frame; the feature point maps to 0.
inline std::vector<Vec3> to_local_frame(const PointCloud& cloud, const SurfacePatch& patch,
                                        const LRF& lrf) {
    std::vector<Vec3> out;
    out.reserve(patch.point_indices.size());
    const Mat3 rot = lrf.rotation();
    for (int i : patch.point_indices) out.push_back(rot * (cloud[i].position - lrf.origin));
    return out;
}

inline std::vector<Vec3> normals_to_local_frame(const PointCloud& cloud,
                                                const SurfacePatch& patch, const LRF& lrf) {
    std::vector<Vec3> out;
    out.reserve(patch.point_indices.size());
    const Mat3 rot = lrf.rotation();
    for (int i : patch.point_indices) {
        if (!cloud[i].has_normal)
            throw std::invalid_argument("normals_to_local_frame: point " + std::to_string(i) +
                                        " has no normal");
        out.push_back(rot * cloud[i].normal);
    }
    return out;
}

}  // namespace gmd
