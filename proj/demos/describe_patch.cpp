// Minimal end-to-end usage example: generate a bumpy synthetic surface,
// detect keypoints, build one descriptor, and print its mixture.

#include "gmd/gmd.hpp"

#include <iostream>

int main() {
    gmd::SynthConfig config;
    config.extent = 6.0;
    config.spacing = 0.15;
    config.bumps = 12;
    config.seed = 7;
    auto [cloud, unused_b, unused_gt] = gmd::generate_fragment_pair(config);

    const gmd::KdTree tree(cloud.positions());
    const double r = gmd::compute_resolution(cloud, tree);
    const auto keypoints = gmd::detect_keypoints(cloud, tree, gmd::default_sift_params(r));
    if (keypoints.empty()) {
        std::cerr << "no keypoints found\n";
        return 1;
    }
    std::cout << cloud.size() << " points, resolution " << r << ", " << keypoints.size()
              << " keypoints\n";

    gmd::GmdParams params;
    params.support_radius = 6.0 * r;
    params.cov_floor = (0.01 * r) * (0.01 * r);
    const gmd::GMD descriptor = gmd::compute_gmd(cloud, tree, keypoints.front().index, params);

    std::cout << "descriptor at keypoint " << descriptor.keypoint << ": k1 (convex) = "
              << descriptor.k1 << ", k2 (concave) = " << descriptor.k2 << ", "
              << descriptor.point_count << " patch points\n";
    for (int i = 0; i < descriptor.mixture.size(); ++i) {
        std::cout << "  component " << i << ": weight " << descriptor.mixture.weights[i]
                  << ", mean [" << descriptor.mixture.means[i].transpose() << "]\n";
    }
    std::cout << "serialized length: " << gmd::gmd_vector(descriptor).size() << " values ("
              << 13 * descriptor.mixture.size() << " expected)\n";
    return 0;
}
