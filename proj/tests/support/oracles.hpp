#pragma once

// Independent reference implementations used to check the library: brute-force
// neighbor scans and tensor-product Simpson quadrature over mixture densities.
// Nothing here calls the code paths under test.

#include "gmd/gmm.hpp"
#include "gmd/point_cloud.hpp"

#include <vector>

namespace oracles {

using gmd::GMM;
using gmd::Mat3;
using gmd::PointCloud;
using gmd::Vec3;

inline double brute_resolution(const PointCloud& cloud) {
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cloud.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, (cloud[i].position - cloud[j].position).norm());
        }
        sum += best;
    }
    return sum / static_cast<double>(cloud.size());
}

inline std::vector<int> brute_radius_search(const PointCloud& cloud, const Vec3& center,
                                            double radius) {
    std::vector<int> out;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if ((cloud[i].position - center).norm() < radius) out.push_back(static_cast<int>(i));
    return out;
}

// Direct dense evaluation of one Gaussian, kept free of the library's
// LLT-based path (explicit inverse and determinant).
struct DenseGaussian {
    Vec3 mean;
    Mat3 inv;
    double norm;

    DenseGaussian(const Vec3& mu, const Mat3& cov) : mean(mu) {
        inv = cov.inverse();
        norm = 1.0 / std::sqrt(std::pow(2.0 * M_PI, 3) * std::abs(cov.determinant()));
    }

    double operator()(const Vec3& x) const {
        const Vec3 d = x - mean;
        const double q = d.dot(inv * d);
        if (q > 160.0) return 0.0;
        return norm * std::exp(-0.5 * q);
    }
};

struct DenseMixture {
    std::vector<double> weights;
    std::vector<DenseGaussian> comps;

    explicit DenseMixture(const GMM& g) {
        for (int i = 0; i < g.size(); ++i) {
            weights.push_back(g.weights[i]);
            comps.emplace_back(g.means[i], g.covariances[i]);
        }
    }

    double operator()(const Vec3& x) const {
        double p = 0.0;
        for (std::size_t i = 0; i < comps.size(); ++i) p += weights[i] * comps[i](x);
        return p;
    }
};

inline void mixture_bounds(const GMM& g, Vec3& lo, Vec3& hi, double sigmas = 7.0) {
    for (int i = 0; i < g.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<Mat3> solver(g.covariances[i]);
        const double spread = sigmas * std::sqrt(solver.eigenvalues().maxCoeff());
        lo = lo.cwiseMin((g.means[i].array() - spread).matrix());
        hi = hi.cwiseMax((g.means[i].array() + spread).matrix());
    }
}

inline std::vector<double> simpson_weights(int n) {
    // n odd >= 3, composite Simpson weights (multiplied by h/3 later)
    std::vector<double> w(n, 0.0);
    w[0] = w[n - 1] = 1.0;
    for (int i = 1; i + 1 < n; ++i) w[i] = (i % 2 == 1) ? 4.0 : 2.0;
    return w;
}

// Tensor-product composite Simpson integral of fn over [lo, hi].
template <typename Fn>
double simpson3d(const Vec3& lo, const Vec3& hi, int n_per_axis, Fn&& fn) {
    int n = n_per_axis | 1;  // odd
    if (n < 3) n = 3;
    const Vec3 h = (hi - lo) / static_cast<double>(n - 1);
    const auto w = simpson_weights(n);
    double total = 0.0;
    for (int ix = 0; ix < n; ++ix) {
        const double x = lo.x() + ix * h.x();
        double plane = 0.0;
        for (int iy = 0; iy < n; ++iy) {
            const double y = lo.y() + iy * h.y();
            double line = 0.0;
            for (int iz = 0; iz < n; ++iz)
                line += w[iz] * fn(Vec3(x, y, lo.z() + iz * h.z()));
            plane += w[iy] * line;
        }
        total += w[ix] * plane;
    }
    return total * (h.x() / 3.0) * (h.y() / 3.0) * (h.z() / 3.0);
}

// Numerical integral of (p_a - p_b)^2, the oracle for the closed-form Eq.-15
// distance.
inline double numeric_l2_distance(const GMM& a, const GMM& b, int n_per_axis = 121) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    mixture_bounds(a, lo, hi);
    mixture_bounds(b, lo, hi);
    const DenseMixture pa(a), pb(b);
    return simpson3d(lo, hi, n_per_axis, [&](const Vec3& x) {
        const double d = pa(x) - pb(x);
        return d * d;
    });
}

inline double numeric_mixture_integral(const GMM& g, int n_per_axis = 81) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    mixture_bounds(g, lo, hi);
    const DenseMixture p(g);
    return simpson3d(lo, hi, n_per_axis, [&](const Vec3& x) { return p(x); });
}

inline double relative_error(double a, double b, double floor = 1e-12) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracles
