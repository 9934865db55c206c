#pragma once

#include "gmd/alignment.hpp"
#include "gmd/regions.hpp"

#include <optional>

namespace gmd {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RmseValues {
    Vec3 per_axis = Vec3::Zero();
    double total = 0.0;
};

// The evaluation suite of a matched pair. Angles in degrees, PoC in percent.
// Plane-normal angles are reported folded to [0,90] (edge-plane orientation is
// arbitrary) alongside the raw oriented values.
struct MatchReport {
    double poc = 0.0;
    double aonv = 0.0;
    double aonv_raw = 0.0;
    double local_aonv = 0.0;
    double local_aonv_raw = 0.0;
    double max_angle = 0.0;
    double min_angle = 0.0;
    double mean_angle = 0.0;
    std::optional<RmseValues> rmse;
    std::optional<double> runtime_seconds;
};

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct PRCurve {
    std::vector<PrPoint> points;
};

struct PlaneAngles {
    double folded_deg = 0.0;  // in [0, 90]
    double raw_deg = 0.0;     // in [0, 180]
};

inline PlaneAngles plane_normal_angle(const Vec3& n1, const Vec3& n2) {
    const double c = std::clamp(n1.normalized().dot(n2.normalized()), -1.0, 1.0);
    const double raw = deg(std::acos(c));
    return {std::min(raw, 180.0 - raw), raw};
}

// Eq. 16/17 orthogonal projection onto the plane.
inline std::vector<Vec3> project_to_plane(const PointCloud& cloud, const Plane& plane) {
    std::vector<Vec3> out;
    out.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        const double t = plane.signed_distance(p.position) / plane.normal.squaredNorm();
        out.push_back(p.position - t * plane.normal);
    }
    return out;
}

namespace detail {

inline Vec3 mean_normal_or_z(const PointCloud& cloud) {
    Vec3 sum = Vec3::Zero();
    for (const auto& p : cloud.points)
        if (p.has_normal) sum += p.normal;
    return sum.norm() > 1e-12 ? Vec3(sum.normalized()) : Vec3(Vec3::UnitZ());
}

inline Plane edge_plane(const PointCloud& cloud, int edge_k) {
    const auto edges = extract_edge_points(cloud, edge_k);
    return fit_plane(cloud, edges, mean_normal_or_z(cloud));
}

}  // namespace detail

// Percentage of the smaller surface's projected points that find a partner
// from the bigger surface within chi, both projected onto the plane fitted to
// the bigger surface's edge points.
inline double poc(const PointCloud& aligned_src, const PointCloud& aligned_dst, double chi,
                  int edge_k = 10) {
    if (aligned_src.empty() || aligned_dst.empty())
        throw std::invalid_argument("poc: empty cloud");
    if (chi <= 0.0) throw std::invalid_argument("poc: chi must be positive");
    const bool src_bigger = aligned_src.size() >= aligned_dst.size();
    const PointCloud& bigger = src_bigger ? aligned_src : aligned_dst;
    const PointCloud& smaller = src_bigger ? aligned_dst : aligned_src;

    const Plane plane = detail::edge_plane(bigger, edge_k);
    const auto proj_big = project_to_plane(bigger, plane);
    const auto proj_small = project_to_plane(smaller, plane);

    const KdTree tree(proj_big);
    std::size_t paired = 0;
    for (const auto& q : proj_small) {
        const int j = tree.nearest(q);
        if ((proj_big[j] - q).norm() < chi) ++paired;
    }
    return 100.0 * static_cast<double>(paired) / static_cast<double>(proj_small.size());
}

// Angle between the edge-point-fitted plane normals of the aligned surfaces.
inline PlaneAngles aonv(const PointCloud& src, const PointCloud& dst, int edge_k = 10) {
    const Plane ps = detail::edge_plane(src, edge_k);
    const Plane pd = detail::edge_plane(dst, edge_k);
    return plane_normal_angle(ps.normal, pd.normal);
}

// Deterministic data-derived frame: principal axes through the centroid with
// signs fixed by the third moment. Makes the localAoNV boxes well defined
// regardless of the pose the aligned pair arrives in.
inline RigidTransform canonical_frame(const PointCloud& cloud) {
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

    auto fix_sign = [&](Vec3 axis) {
        double m3 = 0.0, scale = 0.0;
        for (const auto& p : cloud.points) {
            const double s = (p.position - c).dot(axis);
            m3 += s * s * s;
            scale += std::abs(s * s * s);
        }
        if (std::abs(m3) > 1e-9 * std::max(scale, 1e-300)) return m3 >= 0 ? axis : Vec3(-axis);
        int imax = 0;
        axis.cwiseAbs().maxCoeff(&imax);
        return axis[imax] >= 0 ? axis : Vec3(-axis);
    };

    const Vec3 a0 = fix_sign(evecs.col(2));
    const Vec3 a1 = fix_sign(evecs.col(1));
    RigidTransform t;
    t.rotation.row(0) = a0;
    t.rotation.row(1) = a1;
    t.rotation.row(2) = a0.cross(a1);
    t.translation = -(t.rotation * c);
    return t;
}

// Mean plane-normal angle over per-keypoint cubes of side l (axis-aligned in
// the target's canonical frame). Catches vertically flipped alignments that
// PoC and AoNV miss.
inline PlaneAngles local_aonv(const PointCloud& src, const PointCloud& dst,
                              const std::vector<int>& dst_keypoints, double box_side) {
    if (box_side <= 0.0) throw std::invalid_argument("local_aonv: box side must be positive");
    if (dst_keypoints.empty()) throw MetricError("local_aonv: no keypoints");
    const RigidTransform frame = canonical_frame(dst);
    std::vector<Vec3> src_c, dst_c;
    src_c.reserve(src.size());
    dst_c.reserve(dst.size());
    for (const auto& p : src.points) src_c.push_back(frame.apply(p.position));
    for (const auto& p : dst.points) dst_c.push_back(frame.apply(p.position));

    const double half = box_side / 2.0;
    double folded_sum = 0.0, raw_sum = 0.0;
    int valid = 0;
    std::vector<Vec3> in_src, in_dst;
    for (int kp : dst_keypoints) {
        const Vec3 center = dst_c[kp];
        in_src.clear();
        in_dst.clear();
        for (const auto& q : src_c)
            if ((q - center).cwiseAbs().maxCoeff() <= half) in_src.push_back(q);
        for (const auto& q : dst_c)
            if ((q - center).cwiseAbs().maxCoeff() <= half) in_dst.push_back(q);
        if (in_src.size() < 3 || in_dst.size() < 3) continue;
        try {
            const Plane ps = fit_plane(in_src, Vec3::UnitZ());
            const Plane pd = fit_plane(in_dst, Vec3::UnitZ());
            const auto angle = plane_normal_angle(ps.normal, pd.normal);
            folded_sum += angle.folded_deg;
            raw_sum += angle.raw_deg;
            ++valid;
        } catch (const PlaneFitError&) {
            continue;
        }
    }
    if (valid == 0) throw MetricError("local_aonv: no keypoint box holds both surfaces");
    return {folded_sum / valid, raw_sum / valid};
}

struct AngleStats {
    double max_deg = 0.0;
    double min_deg = 0.0;
    double mean_deg = 0.0;
};

// Angle between each source point's normal and the normal of its nearest
// neighbor on the other surface.
inline AngleStats angle_stats(const PointCloud& src, const PointCloud& dst) {
    if (src.empty() || dst.empty()) throw std::invalid_argument("angle_stats: empty cloud");
    if (!src.has_normals() || !dst.has_normals())
        throw std::invalid_argument("angle_stats: normals required on both clouds");
    const KdTree tree(dst.positions());
    AngleStats stats;
    stats.max_deg = 0.0;
    stats.min_deg = 180.0;
    double sum = 0.0;
    for (const auto& p : src.points) {
        const int j = tree.nearest(p.position);
        const double c = std::clamp(p.normal.dot(dst[j].normal), -1.0, 1.0);
        const double a = deg(std::acos(c));
        stats.max_deg = std::max(stats.max_deg, a);
        stats.min_deg = std::min(stats.min_deg, a);
        sum += a;
    }
    stats.mean_deg = sum / static_cast<double>(src.size());
    return stats;
}

// Per-axis and total RMSE of the correspondence residuals under a transform.
inline RmseValues rmse(const std::vector<Correspondence>& correspondences, const PointCloud& src,
                       const PointCloud& dst, const RigidTransform& transform) {
    if (correspondences.empty()) throw std::invalid_argument("rmse: no correspondences");
    Vec3 sq = Vec3::Zero();
    for (const auto& c : correspondences) {
        const Vec3 r =
            transform.apply(src[c.source_keypoint].position) - dst[c.target_keypoint].position;
        sq += r.cwiseProduct(r);
    }
    sq /= static_cast<double>(correspondences.size());
    RmseValues out;
    out.per_axis = sq.cwiseSqrt();
    out.total = std::sqrt(sq.sum());
    return out;
}

// Precision/recall across distance thresholds; a returned match counts as
// correct when the ground-truth transform carries its source keypoint to
// within correct_tol of its target keypoint.
inline PRCurve pr_curve(const std::vector<Correspondence>& matches,
                        const std::vector<std::pair<int, int>>& ground_truth_pairs,
                        const RigidTransform& ground_truth, const PointCloud& src,
                        const PointCloud& dst, double correct_tol,
                        const std::vector<double>& thresholds) {
    if (ground_truth_pairs.empty()) throw std::invalid_argument("pr_curve: empty ground truth");
    std::vector<char> correct(matches.size(), 0);
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const Vec3 moved = ground_truth.apply(src[matches[i].source_keypoint].position);
        correct[i] =
            (moved - dst[matches[i].target_keypoint].position).norm() < correct_tol ? 1 : 0;
    }
    PRCurve curve;
    for (double th : thresholds) {
        std::size_t returned = 0, good = 0;
        for (std::size_t i = 0; i < matches.size(); ++i) {
            if (matches[i].distance <= th) {
                ++returned;
                if (correct[i]) ++good;
            }
        }
        PrPoint p;
        p.threshold = th;
        p.precision = returned == 0 ? 1.0 : static_cast<double>(good) / returned;
        p.recall = std::min(
            1.0, static_cast<double>(good) / static_cast<double>(ground_truth_pairs.size()));
        curve.points.push_back(p);
    }
    return curve;
}

inline void write_pr_csv(const PRCurve& curve, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << "threshold,precision,recall\n";
    file << std::setprecision(17);
    for (const auto& p : curve.points)
        file << p.threshold << ',' << p.precision << ',' << p.recall << '\n';
}

}  // namespace gmd
