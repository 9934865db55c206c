#pragma once

// Shared generators for the test suites. Everything is seeded and
// deterministic.

#include "gmd/gmm.hpp"
#include "gmd/point_cloud.hpp"
#include "gmd/synth.hpp"

#include <random>

namespace testdata {

using gmd::Mat3;
using gmd::PointCloud;
using gmd::Vec3;

inline PointCloud grid_cloud(int nx, int ny, double spacing, double z = 0.0,
                             bool with_normals = false) {
    PointCloud cloud;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            gmd::Point p;
            p.position = Vec3(ix * spacing, iy * spacing, z);
            if (with_normals) {
                p.normal = Vec3::UnitZ();
                p.has_normal = true;
            }
            cloud.points.push_back(p);
        }
    }
    return cloud;
}

inline PointCloud random_cloud(int n, std::uint64_t seed, double extent = 10.0,
                               bool with_normals = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, extent);
    std::normal_distribution<double> gauss(0.0, 1.0);
    PointCloud cloud;
    for (int i = 0; i < n; ++i) {
        gmd::Point p;
        p.position = Vec3(coord(rng), coord(rng), coord(rng));
        if (with_normals) {
            Vec3 v(gauss(rng), gauss(rng), gauss(rng));
            while (v.norm() < 1e-6) v = Vec3(gauss(rng), gauss(rng), gauss(rng));
            p.normal = v.normalized();
            p.has_normal = true;
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

inline gmd::RigidTransform random_rigid(std::uint64_t seed, double translation_scale = 5.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    while (q.norm() < 1e-6) q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    gmd::RigidTransform t;
    t.rotation = q.toRotationMatrix();
    t.translation =
        Vec3(gauss(rng), gauss(rng), gauss(rng)) * translation_scale;
    return t;
}

// Bumpy heightfield sampled on a jittered grid; analytic normals. The
// standard patch-scale surface for LRF/descriptor tests.
inline PointCloud bumpy_cloud(std::uint64_t seed, double extent = 6.0, double spacing = 0.15,
                              int bumps = 10, double amplitude = 0.5) {
    gmd::SynthConfig config;
    config.extent = extent;
    config.spacing = spacing;
    config.bumps = bumps;
    config.bump_amplitude = amplitude;
    config.seed = seed;
    auto [a, b, gt] = gmd::generate_fragment_pair(config);
    return a;
}

inline gmd::GMM random_mixture(int k, std::uint64_t seed, double mean_extent = 2.0,
                               double eig_min = 0.4, double eig_max = 1.5) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    gmd::GMM g;
    std::vector<double> raw(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        raw[i] = 0.2 + unit(rng);
        sum += raw[i];
    }
    for (int i = 0; i < k; ++i) {
        g.weights.push_back(raw[i] / sum);
        g.means.emplace_back((2.0 * unit(rng) - 1.0) * mean_extent,
                             (2.0 * unit(rng) - 1.0) * mean_extent,
                             (2.0 * unit(rng) - 1.0) * mean_extent);
        Mat3 a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) = gauss(rng);
        Eigen::HouseholderQR<Mat3> qr(a);
        Mat3 q = qr.householderQ();
        Vec3 evals(eig_min + unit(rng) * (eig_max - eig_min),
                   eig_min + unit(rng) * (eig_max - eig_min),
                   eig_min + unit(rng) * (eig_max - eig_min));
        g.covariances.push_back(q * evals.asDiagonal() * q.transpose());
    }
    return g;
}

inline std::vector<Vec3> gaussian_samples(const Vec3& mean, const Mat3& cov, int n,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::LLT<Mat3> llt(cov);
    const Mat3 l = llt.matrixL();
    std::vector<Vec3> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back(mean + l * Vec3(gauss(rng), gauss(rng), gauss(rng)));
    return out;
}

}  // namespace testdata
