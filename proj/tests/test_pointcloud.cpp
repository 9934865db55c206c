#include "gmd/ply_io.hpp"
#include "gmd/point_cloud.hpp"

#include "support/oracles.hpp"
#include "support/testdata.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace gmd;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("load_ply reads a minimal one-vertex file") {
    const std::string path = temp_path("gmd_minimal.ply");
    {
        std::ofstream f(path);
        f << "ply\nformat ascii 1.0\nelement vertex 1\n"
             "property float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n";
    }
    const PointCloud cloud = load_ply(path);
    REQUIRE(cloud.size() == 1);
    CHECK(cloud[0].position == Vec3(0, 0, 0));
    CHECK_FALSE(cloud[0].has_normal);
    std::remove(path.c_str());
}

TEST_CASE("save_ply/load_ply round trip is exact") {
    PointCloud cloud = testdata::random_cloud(100, 42, 10.0, true);

    SECTION("binary little endian") {
        const std::string path = temp_path("gmd_roundtrip.ply");
        save_ply(cloud, path);
        const PointCloud back = load_ply(path);
        REQUIRE(back.size() == cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            // bit-exact coordinates
            CHECK(back[i].position.x() == cloud[i].position.x());
            CHECK(back[i].position.y() == cloud[i].position.y());
            CHECK(back[i].position.z() == cloud[i].position.z());
            REQUIRE(back[i].has_normal);
            CHECK(back[i].normal == cloud[i].normal);
        }
        std::remove(path.c_str());
    }

    SECTION("ascii") {
        const std::string path = temp_path("gmd_roundtrip_ascii.ply");
        save_ply(cloud, path, PlyFormat::Ascii);
        const PointCloud back = load_ply(path);
        REQUIRE(back.size() == cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i)
            CHECK(back[i].position == cloud[i].position);
        std::remove(path.c_str());
    }

    SECTION("clouds without normals do not gain them") {
        for (auto& p : cloud.points) p.has_normal = false;
        const std::string path = temp_path("gmd_nonormals.ply");
        save_ply(cloud, path);
        const PointCloud back = load_ply(path);
        CHECK_FALSE(back.has_normals());
        std::remove(path.c_str());
    }
}

TEST_CASE("load_ply rejects malformed input") {
    SECTION("count mismatch, ascii") {
        const std::string path = temp_path("gmd_short.ply");
        {
            std::ofstream f(path);
            f << "ply\nformat ascii 1.0\nelement vertex 5\n"
                 "property float x\nproperty float y\nproperty float z\nend_header\n"
                 "0 0 0\n1 0 0\n2 0 0\n3 0 0\n";
        }
        CHECK_THROWS_AS(load_ply(path), PlyError);
        CHECK_THROWS_WITH(load_ply(path), Catch::Matchers::ContainsSubstring("vertex"));
        std::remove(path.c_str());
    }

    SECTION("count mismatch, binary") {
        const std::string path = temp_path("gmd_short_bin.ply");
        {
            std::ofstream f(path, std::ios::binary);
            f << "ply\nformat binary_little_endian 1.0\nelement vertex 5\n"
                 "property double x\nproperty double y\nproperty double z\nend_header\n";
            const double row[3] = {0, 0, 0};
            for (int i = 0; i < 4; ++i)
                f.write(reinterpret_cast<const char*>(row), sizeof(row));
        }
        CHECK_THROWS_AS(load_ply(path), PlyError);
        std::remove(path.c_str());
    }

    SECTION("missing magic") {
        const std::string path = temp_path("gmd_bad_magic.ply");
        {
            std::ofstream f(path);
            f << "plyx\nformat ascii 1.0\nend_header\n";
        }
        CHECK_THROWS_AS(load_ply(path), PlyError);
        std::remove(path.c_str());
    }

    SECTION("non-finite coordinate named with its vertex") {
        const std::string path = temp_path("gmd_nan.ply");
        {
            std::ofstream f(path);
            f << "ply\nformat ascii 1.0\nelement vertex 2\n"
                 "property float x\nproperty float y\nproperty float z\nend_header\n"
                 "0 0 0\nnan 0 0\n";
        }
        CHECK_THROWS_WITH(load_ply(path), Catch::Matchers::ContainsSubstring("vertex 1"));
        std::remove(path.c_str());
    }

    SECTION("nonexistent file") {
        CHECK_THROWS_AS(load_ply(temp_path("gmd_does_not_exist.ply")), PlyError);
    }
}

TEST_CASE("load_ply skips extra properties and elements") {
    const std::string path = temp_path("gmd_extra.ply");
    {
        std::ofstream f(path);
        f << "ply\nformat ascii 1.0\ncomment created for tests\n"
             "element vertex 2\n"
             "property float x\nproperty float y\nproperty float z\n"
             "property uchar red\n"
             "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
             "0 0 0 255\n1 2 3 10\n3 0 1 0\n";
    }
    const PointCloud cloud = load_ply(path);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud[1].position == Vec3(1, 2, 3));
    std::remove(path.c_str());
}

TEST_CASE("compute_resolution matches its definition") {
    SECTION("two points at distance 3") {
        PointCloud cloud;
        cloud.points.resize(2);
        cloud[0].position = Vec3(0, 0, 0);
        cloud[1].position = Vec3(3, 0, 0);
        CHECK(compute_resolution(cloud) == Catch::Approx(3.0).margin(1e-12));
    }

    SECTION("planar grid with unit spacing") {
        const PointCloud cloud = testdata::grid_cloud(10, 10, 1.0);
        CHECK(compute_resolution(cloud) == Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("random cloud equals the exhaustive oracle") {
        const PointCloud cloud = testdata::random_cloud(200, 7);
        CHECK(compute_resolution(cloud) ==
              Catch::Approx(oracles::brute_resolution(cloud)).margin(1e-9));
    }

    SECTION("fewer than 2 points is an error") {
        PointCloud cloud;
        cloud.points.resize(1);
        CHECK_THROWS_AS(compute_resolution(cloud), std::invalid_argument);
    }

    SECTION("invariant under rigid transform and permutation") {
        const PointCloud cloud = testdata::random_cloud(150, 8);
        const double r = compute_resolution(cloud);
        const PointCloud moved = apply_transform(cloud, testdata::random_rigid(3));
        CHECK(compute_resolution(moved) == Catch::Approx(r).margin(1e-9));

        PointCloud shuffled = cloud;
        std::mt19937_64 rng(5);
        std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
        CHECK(compute_resolution(shuffled) == Catch::Approx(r).margin(1e-9));
    }
}

TEST_CASE("radius_search matches a brute-force scan") {
    SECTION("tiny radius keeps only coincident points") {
        PointCloud cloud = testdata::random_cloud(50, 11);
        cloud.points.push_back(cloud.points[10]);  // exact duplicate
        const auto found =
            radius_search(cloud, cloud[10].position, 1e-9);
        CHECK(found == std::vector<int>{10, 50});
    }

    SECTION("grid neighborhoods by enumeration") {
        const PointCloud cloud = testdata::grid_cloud(7, 7, 1.0);
        const int center = 3 * 7 + 3;
        // distances from an interior node: 4 at 1.0, 4 at sqrt(2)~1.414, 4 at 2.0
        CHECK(radius_search(cloud, cloud[center].position, 1.2).size() == 5);
        CHECK(radius_search(cloud, cloud[center].position, 1.5).size() == 9);
        // strictness: radius exactly 1.0 excludes the axis neighbors
        CHECK(radius_search(cloud, cloud[center].position, 1.0).size() == 1);
        CHECK(radius_search(cloud, cloud[center].position, 1.5) ==
              oracles::brute_radius_search(cloud, cloud[center].position, 1.5));
    }

    SECTION("randomized queries equal the linear scan") {
        for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
            const PointCloud cloud = testdata::random_cloud(300, seed);
            const KdTree tree(cloud.positions());
            std::mt19937_64 rng(seed + 100);
            std::uniform_real_distribution<double> coord(-1.0, 11.0);
            std::uniform_real_distribution<double> rad(0.1, 6.0);
            for (int q = 0; q < 25; ++q) {
                const Vec3 center(coord(rng), coord(rng), coord(rng));
                const double radius = rad(rng);
                CHECK(radius_search(tree, center, radius) ==
                      oracles::brute_radius_search(cloud, center, radius));
            }
        }
    }

    SECTION("non-positive radius is an error") {
        const PointCloud cloud = testdata::random_cloud(10, 1);
        CHECK_THROWS_AS(radius_search(cloud, Vec3::Zero(), 0.0), std::invalid_argument);
    }
}

TEST_CASE("apply_transform") {
    const PointCloud cloud = testdata::random_cloud(120, 13, 10.0, true);

    SECTION("identity is a no-op") {
        const PointCloud same = apply_transform(cloud, RigidTransform{});
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            CHECK(same[i].position == cloud[i].position);
            CHECK(same[i].normal == cloud[i].normal);
        }
    }

    SECTION("transform then inverse restores the cloud") {
        const RigidTransform t = testdata::random_rigid(21);
        const PointCloud back = apply_transform(apply_transform(cloud, t), t.inverse());
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            CHECK((back[i].position - cloud[i].position).norm() < 1e-9);
            CHECK((back[i].normal - cloud[i].normal).norm() < 1e-9);
        }
    }

    SECTION("resolution preserved under rigid motion") {
        const double r = compute_resolution(cloud);
        for (std::uint64_t seed : {31, 32, 33}) {
            const PointCloud moved = apply_transform(cloud, testdata::random_rigid(seed));
            CHECK(compute_resolution(moved) == Catch::Approx(r).margin(1e-9));
        }
    }
}

TEST_CASE("estimate_normals") {
    SECTION("planar grid gets the plane normal") {
        const PointCloud cloud = testdata::grid_cloud(12, 12, 1.0);
        const PointCloud with = estimate_normals(cloud, 10, Vec3(0, 0, 1));
        for (const auto& p : with.points) {
            REQUIRE(p.has_normal);
            CHECK((p.normal - Vec3(0, 0, 1)).norm() < 1e-6);
        }
    }

    SECTION("hemisphere samples point radially") {
        PointCloud cloud;
        // Fibonacci-style hemisphere of the unit sphere (z > 0.2)
        const int n = 600;
        for (int i = 0; i < n; ++i) {
            const double z = 0.2 + 0.8 * (i + 0.5) / n;
            const double phi = 2.399963229728653 * i;
            const double s = std::sqrt(1.0 - z * z);
            gmd::Point p;
            p.position = Vec3(s * std::cos(phi), s * std::sin(phi), z);
            cloud.points.push_back(p);
        }
        const PointCloud with = estimate_normals(cloud, 10, Vec3(0, 0, 10));
        for (const auto& p : with.points) {
            REQUIRE(p.has_normal);
            const double angle = gmd::deg(std::acos(
                std::clamp(p.normal.dot(p.position.normalized()), -1.0, 1.0)));
            CHECK(angle < 5.0);
        }
    }

    SECTION("collinear neighborhoods leave normals unset") {
        PointCloud cloud;
        for (int i = 0; i < 30; ++i) {
            gmd::Point p;
            p.position = Vec3(i * 0.5, 0, 0);
            cloud.points.push_back(p);
        }
        const PointCloud with = estimate_normals(cloud, 3, Vec3(0, 0, 1));
        for (const auto& p : with.points) CHECK_FALSE(p.has_normal);
    }

    SECTION("parameter validation") {
        const PointCloud cloud = testdata::random_cloud(20, 2);
        CHECK_THROWS_AS(estimate_normals(cloud, 2, Vec3(0, 0, 1)), std::invalid_argument);
        CHECK_THROWS_AS(estimate_normals(cloud, 25, Vec3(0, 0, 1)), std::invalid_argument);
    }
}
