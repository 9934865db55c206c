#pragma once

#include "gmd/gmm.hpp"
#include "gmd/lrf.hpp"
#include "gmd/regions.hpp"

#include <fstream>
#include <iomanip>
#include <optional>

namespace gmd {

enum class SkipReason {
    None,
    InsufficientSupport,
    RankDeficient,
    DegenerateAxis,
    MissingNormals,
    EdgeExtraction,
    PlaneFit,
    EmCollapse,
};

inline const char* skip_reason_name(SkipReason r) {
    switch (r) {
        case SkipReason::None: return "none";
        case SkipReason::InsufficientSupport: return "insufficient_support";
        case SkipReason::RankDeficient: return "rank_deficient";
        case SkipReason::DegenerateAxis: return "degenerate_axis";
        case SkipReason::MissingNormals: return "missing_normals";
        case SkipReason::EdgeExtraction: return "edge_extraction";
        case SkipReason::PlaneFit: return "plane_fit";
        case SkipReason::EmCollapse: return "em_collapse";
    }
    return "unknown";
}

// Merged concave+convex mixture describing one surface patch, expressed in
// the patch LRF. Serialized as k weights, 3k means, 9k covariances.
struct GMD {
    GMM mixture;            // convex components first, then concave
    int k1 = 0;             // convex component count
    int k2 = 0;             // concave component count
    int point_count = 0;    // E
    int concave_count = 0;  // E_conc
    int convex_count = 0;   // E_conv
    LRF lrf;
    int keypoint = -1;      // cloud point index of the feature point
};

struct GmdParams {
    double support_radius = 0.0;
    int min_patch_points = 20;
    int min_region_points = 20;
    int k_max = 8;
    double em_tau = 1e-6;
    int em_max_iters = 200;
    double cov_floor = 0.0;  // covariance eigenvalue floor, typically (0.01*r)^2
    std::uint64_t seed = 0;
    ConcavityRule rule = ConcavityRule::NormalDot;
    int edge_k = 10;
    double edge_gap_deg = 90.0;
};

// x-means for k, then EM; the regional mixture of one concavity class.
inline GMM build_regional_gmd(const std::vector<Vec3>& points, int k_max, double tau,
                              std::uint64_t seed, double cov_floor = 0.0, int em_max_iters = 200) {
    XMeansParams xp;
    xp.k_max = k_max;
    xp.seed = seed;
    xp.var_floor = cov_floor;
    const ClusterSet clusters = run_xmeans(points, xp);
    EmParams ep;
    ep.tau = tau;
    ep.max_iters = em_max_iters;
    ep.cov_floor = cov_floor;
    return em_fit(points, clusters, ep).first;
}

// Eq.-14 merge: concatenate the regional mixtures with weights rescaled by
// their region's share of the patch points.
inline GMD merge_gmd(const std::optional<GMM>& conc, const std::optional<GMM>& conv, int e_conc,
                     int e_conv, const LRF& lrf) {
    if (!conc && !conv) throw std::invalid_argument("merge_gmd: both regional GMDs absent");
    if (e_conc < 0 || e_conv < 0 || e_conc + e_conv == 0)
        throw std::invalid_argument("merge_gmd: invalid region point counts");
    const double e = static_cast<double>(e_conc + e_conv);

    GMD out;
    out.lrf = lrf;
    out.point_count = e_conc + e_conv;
    out.concave_count = e_conc;
    out.convex_count = e_conv;
    auto append = [&](const GMM& g, double share) {
        for (int i = 0; i < g.size(); ++i) {
            out.mixture.weights.push_back(g.weights[i] * share);
            out.mixture.means.push_back(g.means[i]);
            out.mixture.covariances.push_back(g.covariances[i]);
        }
    };
    if (conv) {
        append(*conv, static_cast<double>(e_conv) / e);
        out.k1 = conv->size();
    }
    if (conc) {
        append(*conc, static_cast<double>(e_conc) / e);
        out.k2 = conc->size();
    }
    return out;
}

// Full descriptor pipeline for one keypoint: support patch, LRF, local
// coordinates, reference plane from the patch edge points, concave/convex
// split, regional mixtures, merge.
inline GMD compute_gmd(const PointCloud& cloud, const KdTree& tree, int keypoint,
                       const GmdParams& params) {
    SurfacePatch patch =
        extract_patch(cloud, tree, keypoint, params.support_radius, params.min_patch_points);
    if (params.rule == ConcavityRule::NormalDot) {
        for (int i : patch.point_indices)
            if (!cloud[i].has_normal)
                throw std::invalid_argument("compute_gmd: patch point " + std::to_string(i) +
                                            " has no normal");
    }

    const LRF lrf = compute_lrf(cloud, patch);
    const std::vector<Vec3> local = to_local_frame(cloud, patch, lrf);
    std::vector<Vec3> local_normals;
    if (params.rule == ConcavityRule::NormalDot)
        local_normals = normals_to_local_frame(cloud, patch, lrf);
    else
        local_normals.assign(local.size(), Vec3::Zero());

    const auto edge = edge_point_local_indices(local, params.edge_k, params.edge_gap_deg);
    std::vector<Vec3> edge_pts;
    edge_pts.reserve(edge.size());
    for (int i : edge) edge_pts.push_back(local[i]);
    // the LRF z axis is (0,0,1) in local coordinates
    const Plane plane = fit_plane(edge_pts, Vec3::UnitZ());

    ConcavityLabel labels = classify_concavity(local, local_normals, plane, params.rule);

    std::vector<Vec3> convex_pts, concave_pts;
    for (std::size_t i = 0; i < local.size(); ++i)
        (labels[i] > 0 ? convex_pts : concave_pts).push_back(local[i]);

    // a region too small for a stable fit is absorbed by the other one
    const int min_region = params.min_region_points;
    if (!convex_pts.empty() && static_cast<int>(convex_pts.size()) < min_region &&
        convex_pts.size() <= concave_pts.size()) {
        concave_pts.insert(concave_pts.end(), convex_pts.begin(), convex_pts.end());
        convex_pts.clear();
    } else if (!concave_pts.empty() && static_cast<int>(concave_pts.size()) < min_region &&
               concave_pts.size() <= convex_pts.size()) {
        convex_pts.insert(convex_pts.end(), concave_pts.begin(), concave_pts.end());
        concave_pts.clear();
    }

    std::optional<GMM> conv_gmm, conc_gmm;
    if (!convex_pts.empty())
        conv_gmm = build_regional_gmd(convex_pts, params.k_max, params.em_tau,
                                      mix_seed(params.seed, 2 * keypoint), params.cov_floor,
                                      params.em_max_iters);
    if (!concave_pts.empty())
        conc_gmm = build_regional_gmd(concave_pts, params.k_max, params.em_tau,
                                      mix_seed(params.seed, 2 * keypoint + 1), params.cov_floor,
                                      params.em_max_iters);

    GMD out = merge_gmd(conc_gmm, conv_gmm, static_cast<int>(concave_pts.size()),
                        static_cast<int>(convex_pts.size()), lrf);
    out.keypoint = keypoint;
    return out;
}

// Concavity labels of one keypoint's patch, for debug dumps: the first half
// of compute_gmd without the mixture fitting.
inline std::pair<std::vector<int>, ConcavityLabel> compute_patch_labels(const PointCloud& cloud,
                                                                        const KdTree& tree,
                                                                        int keypoint,
                                                                        const GmdParams& params) {
    SurfacePatch patch =
        extract_patch(cloud, tree, keypoint, params.support_radius, params.min_patch_points);
    const LRF lrf = compute_lrf(cloud, patch);
    const std::vector<Vec3> local = to_local_frame(cloud, patch, lrf);
    std::vector<Vec3> local_normals;
    if (params.rule == ConcavityRule::NormalDot)
        local_normals = normals_to_local_frame(cloud, patch, lrf);
    else
        local_normals.assign(local.size(), Vec3::Zero());
    const auto edge = edge_point_local_indices(local, params.edge_k, params.edge_gap_deg);
    std::vector<Vec3> edge_pts;
    for (int i : edge) edge_pts.push_back(local[i]);
    const Plane plane = fit_plane(edge_pts, Vec3::UnitZ());
    return {patch.point_indices, classify_concavity(local, local_normals, plane, params.rule)};
}

struct DescribeResult {
    std::vector<GMD> descriptors;
    std::vector<std::pair<int, SkipReason>> skipped;  // keypoint -> reason
};

// Descriptors for a keypoint set; failures are recorded per keypoint instead
// of aborting the surface. Parallel across keypoints with per-keypoint seeds,
// so the result is independent of the thread count.
inline DescribeResult describe_surface(const PointCloud& cloud, const KdTree& tree,
                                       const std::vector<int>& keypoints, const GmdParams& params,
                                       int threads = 1) {
    std::vector<std::optional<GMD>> slots(keypoints.size());
    std::vector<SkipReason> reasons(keypoints.size(), SkipReason::None);
    parallel_for(keypoints.size(), threads, [&](std::size_t i) {
        try {
            slots[i] = compute_gmd(cloud, tree, keypoints[i], params);
        } catch (const InsufficientSupportError&) {
            reasons[i] = SkipReason::InsufficientSupport;
        } catch (const LrfRankError&) {
            reasons[i] = SkipReason::RankDeficient;
        } catch (const LrfDegenerateAxisError&) {
            reasons[i] = SkipReason::DegenerateAxis;
        } catch (const EdgeExtractionError&) {
            reasons[i] = SkipReason::EdgeExtraction;
        } catch (const PlaneFitError&) {
            reasons[i] = SkipReason::PlaneFit;
        } catch (const EmCollapseError&) {
            reasons[i] = SkipReason::EmCollapse;
        } catch (const std::invalid_argument&) {
            reasons[i] = SkipReason::MissingNormals;
        }
    });
    DescribeResult out;
    for (std::size_t i = 0; i < keypoints.size(); ++i) {
        if (slots[i])
            out.descriptors.push_back(std::move(*slots[i]));
        else
            out.skipped.emplace_back(keypoints[i], reasons[i]);
    }
    return out;
}

// --- serialization ---------------------------------------------------------

inline std::vector<double> gmd_vector(const GMD& d) {
    std::vector<double> v;
    const int k = d.mixture.size();
    v.reserve(13 * k);
    for (int i = 0; i < k; ++i) v.push_back(d.mixture.weights[i]);
    for (int i = 0; i < k; ++i)
        for (int r = 0; r < 3; ++r) v.push_back(d.mixture.means[i][r]);
    for (int i = 0; i < k; ++i)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) v.push_back(d.mixture.covariances[i](r, c));
    return v;
}

// Binary sidecar: "GMDB", version, record count, then per keypoint the
// record (keypoint, k1, k2, E_conc, E_conv, weights, means, covariances).
inline void write_gmd_file(const std::vector<GMD>& descriptors, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file.write("GMDB", 4);
    const std::uint32_t version = 1;
    const std::uint64_t count = descriptors.size();
    file.write(reinterpret_cast<const char*>(&version), sizeof(version));
    file.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& d : descriptors) {
        const std::int32_t header[5] = {d.keypoint, d.k1, d.k2, d.concave_count, d.convex_count};
        file.write(reinterpret_cast<const char*>(header), sizeof(header));
        const auto values = gmd_vector(d);
        file.write(reinterpret_cast<const char*>(values.data()),
                   static_cast<std::streamsize>(values.size() * sizeof(double)));
    }
    if (!file) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<GMD> read_gmd_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open '" + path + "'");
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t count = 0;
    file.read(magic, 4);
    file.read(reinterpret_cast<char*>(&version), sizeof(version));
    file.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!file || std::string(magic, 4) != "GMDB" || version != 1)
        throw std::runtime_error("'" + path + "' is not a GMD sidecar");
    std::vector<GMD> out;
    out.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        std::int32_t header[5];
        file.read(reinterpret_cast<char*>(header), sizeof(header));
        if (!file) throw std::runtime_error("'" + path + "' truncated at record " +
                                            std::to_string(r));
        GMD d;
        d.keypoint = header[0];
        d.k1 = header[1];
        d.k2 = header[2];
        d.concave_count = header[3];
        d.convex_count = header[4];
        d.point_count = d.concave_count + d.convex_count;
        const int k = d.k1 + d.k2;
        std::vector<double> values(13 * k);
        file.read(reinterpret_cast<char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!file) throw std::runtime_error("'" + path + "' truncated at record " +
                                            std::to_string(r));
        std::size_t pos = 0;
        d.mixture.weights.assign(values.begin(), values.begin() + k);
        pos += k;
        for (int i = 0; i < k; ++i) {
            d.mixture.means.emplace_back(values[pos], values[pos + 1], values[pos + 2]);
            pos += 3;
        }
        for (int i = 0; i < k; ++i) {
            Mat3 cov;
            for (int rr = 0; rr < 3; ++rr)
                for (int cc = 0; cc < 3; ++cc) cov(rr, cc) = values[pos++];
            d.mixture.covariances.push_back(cov);
        }
        out.push_back(std::move(d));
    }
    return out;
}

inline void write_gmd_csv(const std::vector<GMD>& descriptors, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << "keypoint,k1,k2,e_conc,e_conv,values...\n";
    file << std::setprecision(17);
    for (const auto& d : descriptors) {
        file << d.keypoint << ',' << d.k1 << ',' << d.k2 << ',' << d.concave_count << ','
             << d.convex_count;
        for (double v : gmd_vector(d)) file << ',' << v;
        file << '\n';
    }
}

}  // namespace gmd
