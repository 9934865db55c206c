#include "gmd/lrf.hpp"

#include "support/testdata.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gmd;

namespace {

SurfacePatch whole_cloud_patch(const PointCloud& cloud, int center, double radius) {
    SurfacePatch patch;
    patch.center_index = center;
    patch.radius = radius;
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) patch.point_indices.push_back(i);
    return patch;
}

// planar patch in z = 0 with extra mass toward -x; center point at the origin
PointCloud asymmetric_planar_patch() {
    PointCloud cloud;
    auto add = [&](double x, double y) {
        Point p;
        p.position = Vec3(x, y, 0.0);
        cloud.points.push_back(p);
    };
    add(0, 0);  // the feature point, index 0
    for (int ix = -4; ix <= 4; ++ix)
        for (int iy = -4; iy <= 4; ++iy)
            if (ix != 0 || iy != 0) add(ix * 0.4, iy * 0.4);
    for (int i = 0; i < 30; ++i) add(-1.5 - 0.02 * i, 0.11 * (i % 5 - 2));
    return cloud;
}

}  // namespace

TEST_CASE("compute_lrf on an asymmetric planar patch", "[lrf]") {
    const PointCloud cloud = asymmetric_planar_patch();
    const SurfacePatch patch = whole_cloud_patch(cloud, 0, 4.0);
    const LRF lrf = compute_lrf(cloud, patch);

    CHECK(std::abs(lrf.z_axis.dot(Vec3::UnitZ())) == Catch::Approx(1.0).margin(1e-9));
    // mass sits toward -x, so sum of (p - p_i) points toward +x
    CHECK(lrf.x_axis.dot(Vec3::UnitX()) > 0.9);
    CHECK(lrf.origin == cloud[0].position);

    SECTION("axes are orthonormal and right-handed") {
        CHECK(std::abs(lrf.x_axis.norm() - 1.0) < 1e-6);
        CHECK(std::abs(lrf.y_axis.norm() - 1.0) < 1e-6);
        CHECK(std::abs(lrf.z_axis.norm() - 1.0) < 1e-6);
        CHECK(std::abs(lrf.x_axis.dot(lrf.y_axis)) < 1e-6);
        CHECK(std::abs(lrf.x_axis.dot(lrf.z_axis)) < 1e-6);
        CHECK(std::abs(lrf.y_axis.dot(lrf.z_axis)) < 1e-6);
        CHECK((lrf.x_axis.cross(lrf.y_axis) - lrf.z_axis).norm() < 1e-6);
    }
}

TEST_CASE("patch covariance is the unbiased sum about the feature point", "[lrf]") {
    const PointCloud cloud = asymmetric_planar_patch();
    const SurfacePatch patch = whole_cloud_patch(cloud, 0, 4.0);
    const Mat3 cov = patch_covariance(cloud, patch);

    // direct summation oracle, independent loops
    const Vec3 p = cloud[0].position;
    double oracle[3][3] = {};
    for (int idx : patch.point_indices) {
        const Vec3 d = cloud[idx].position - p;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) oracle[r][c] += d[r] * d[c];
    }
    const double denom = static_cast<double>(patch.point_indices.size()) - 1.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(cov(r, c) == Catch::Approx(oracle[r][c] / denom).margin(1e-12));

    // and it is not the centroid-centered covariance for this asymmetric patch
    Vec3 centroid = Vec3::Zero();
    for (int idx : patch.point_indices) centroid += cloud[idx].position;
    centroid /= static_cast<double>(patch.point_indices.size());
    Mat3 centered = Mat3::Zero();
    for (int idx : patch.point_indices) {
        const Vec3 d = cloud[idx].position - centroid;
        centered += d * d.transpose();
    }
    centered /= denom;
    CHECK((cov - centered).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("LRF is rigid-equivariant", "[lrf]") {
    const PointCloud cloud = testdata::bumpy_cloud(5, 4.0, 0.2, 6, 0.7);
    const KdTree tree(cloud.positions());
    const int center = static_cast<int>(cloud.size()) / 2;
    const SurfacePatch patch = extract_patch(cloud, tree, center, 1.2, 10);
    const LRF lrf = compute_lrf(cloud, patch);

    for (std::uint64_t seed : {11, 12, 13, 14, 15}) {
        const RigidTransform t = testdata::random_rigid(seed);
        const PointCloud moved = apply_transform(cloud, t);
        const LRF moved_lrf = compute_lrf(moved, patch);
        CHECK((moved_lrf.x_axis - t.rotate(lrf.x_axis)).norm() < 1e-6);
        CHECK((moved_lrf.y_axis - t.rotate(lrf.y_axis)).norm() < 1e-6);
        CHECK((moved_lrf.z_axis - t.rotate(lrf.z_axis)).norm() < 1e-6);
        CHECK((moved_lrf.origin - t.apply(lrf.origin)).norm() < 1e-9);
    }
}

TEST_CASE("degenerate patches are rejected", "[lrf]") {
    SECTION("centro-symmetric patch has no x axis") {
        PointCloud cloud;
        Point center;
        center.position = Vec3::Zero();
        cloud.points.push_back(center);
        for (int i = 0; i < 12; ++i) {
            const double a = 2.0 * M_PI * i / 12.0;
            Point p;
            p.position = Vec3(std::cos(a), std::sin(a), 0.0);
            cloud.points.push_back(p);
            p.position = Vec3(0.5 * std::cos(a), 0.5 * std::sin(a), 0.0);
            cloud.points.push_back(p);
        }
        const SurfacePatch patch = whole_cloud_patch(cloud, 0, 2.0);
        CHECK_THROWS_AS(compute_lrf(cloud, patch), LrfDegenerateAxisError);
    }

    SECTION("collinear patch has no plane") {
        PointCloud cloud;
        for (int i = 0; i < 25; ++i) {
            Point p;
            p.position = Vec3(0.3 * i, 0.6 * i, -0.2 * i);
            cloud.points.push_back(p);
        }
        const SurfacePatch patch = whole_cloud_patch(cloud, 0, 20.0);
        CHECK_THROWS_AS(compute_lrf(cloud, patch), LrfRankError);
    }
}

TEST_CASE("to_local_frame", "[lrf]") {
    PointCloud cloud = asymmetric_planar_patch();
    SurfacePatch patch = whole_cloud_patch(cloud, 0, 4.0);
    const LRF lrf = compute_lrf(cloud, patch);

    SECTION("the feature point maps to the origin") {
        const auto local = to_local_frame(cloud, patch, lrf);
        CHECK(local[0].norm() < 1e-12);
    }

    SECTION("a point placed along the x axis lands on it") {
        Point extra;
        extra.position = lrf.origin + 0.5 * patch.radius * lrf.x_axis;
        cloud.points.push_back(extra);
        patch.point_indices.push_back(static_cast<int>(cloud.size()) - 1);
        const auto local = to_local_frame(cloud, patch, lrf);
        CHECK((local.back() - Vec3(0.5 * patch.radius, 0, 0)).norm() < 1e-9);
    }

    // a curved patch: exactly planar patches leave the Eq.-4 z sign undecided
    // because the summed point-to-feature vector lies in the plane
    SECTION("local coordinates are invariant under rigid motion") {
        const PointCloud bumpy = testdata::bumpy_cloud(5, 4.0, 0.2, 6, 0.7);
        const KdTree tree(bumpy.positions());
        const SurfacePatch bumpy_patch =
            extract_patch(bumpy, tree, static_cast<int>(bumpy.size()) / 2, 1.2, 10);
        const LRF bumpy_lrf = compute_lrf(bumpy, bumpy_patch);
        const auto local = to_local_frame(bumpy, bumpy_patch, bumpy_lrf);
        for (std::uint64_t seed : {21, 22, 23}) {
            const RigidTransform t = testdata::random_rigid(seed);
            const PointCloud moved = apply_transform(bumpy, t);
            const LRF moved_lrf = compute_lrf(moved, bumpy_patch);
            const auto moved_local = to_local_frame(moved, bumpy_patch, moved_lrf);
            for (std::size_t i = 0; i < local.size(); ++i)
                CHECK((moved_local[i] - local[i]).norm() < 1e-6);
        }
    }
}
