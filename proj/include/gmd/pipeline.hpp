#pragma once

#include "gmd/alignment.hpp"
#include "gmd/descriptor.hpp"
#include "gmd/keypoints.hpp"
#include "gmd/matching.hpp"
#include "gmd/metrics.hpp"
#include "gmd/ply_io.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>

namespace gmd {

struct PipelineStageError : std::runtime_error {
    std::string stage;
    PipelineStageError(const std::string& stage_name, const std::string& message)
        : std::runtime_error("stage '" + stage_name + "': " + message), stage(stage_name) {}
};

// Everything the pipeline needs, with every length expressed as a multiple of
// the point-cloud resolution r so the defaults transfer across scan scales.
struct RunConfig {
    double radius_mult = 6.0;  // descriptor support R
    double chi_mult = 2.0;     // PoC pairing distance
    double box_mult = 10.0;    // localAoNV cube side

    double zeta = 0.0;         // absolute match threshold; 0 = adaptive
    double zeta_factor = 0.6;  // adaptive: factor * median pair distance
    double psi = 0.0;          // absolute decision threshold; 0 = psi_factor * zeta
    double psi_factor = 0.8;
    double ratio_test = 0.9;
    int min_correspondences = 4;

    double ransac_tol_mult = 2.0;
    int ransac_max_iters = 2000;
    double icp_corr_mult = 5.0;
    double icp_eps = 1e-6;
    int icp_max_iters = 100;

    double em_tau = 1e-6;
    int em_max_iters = 200;
    int k_max = 8;
    double cov_floor_mult = 0.01;  // covariance eigenvalue floor = (mult*r)^2
    int min_patch_points = 20;
    int min_region_points = 20;
    std::string concavity_rule = "normal_dot";  // or "plane_distance"

    int normal_k = 10;
    double sift_min_scale_mult = 1.0;
    int sift_octaves = 3;
    int sift_scales_per_octave = 4;
    double sift_contrast = 0.0;
    double nms_mult = 1.0;
    double curvature_radius_mult = 2.0;
    int max_keypoints = 0;  // 0 = keep all

    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware concurrency
    bool report_timing = false;
    std::string report_format = "json";  // json | csv | both

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0))
                throw std::invalid_argument(std::string("config: ") + name +
                                            " must be positive");
        };
        positive(radius_mult, "radius_mult");
        positive(chi_mult, "chi_mult");
        positive(box_mult, "box_mult");
        positive(zeta_factor, "zeta_factor");
        positive(psi_factor, "psi_factor");
        positive(ransac_tol_mult, "ransac_tol_mult");
        positive(icp_corr_mult, "icp_corr_mult");
        positive(cov_floor_mult, "cov_floor_mult");
        positive(sift_min_scale_mult, "sift_min_scale_mult");
        positive(nms_mult, "nms_mult");
        positive(curvature_radius_mult, "curvature_radius_mult");
        if (concavity_rule != "normal_dot" && concavity_rule != "plane_distance")
            throw std::invalid_argument("config: unknown concavity_rule '" + concavity_rule +
                                        "'");
        if (report_format != "json" && report_format != "csv" && report_format != "both")
            throw std::invalid_argument("config: unknown report_format '" + report_format + "'");
    }

    ConcavityRule rule() const {
        return concavity_rule == "plane_distance" ? ConcavityRule::PlaneDistance
                                                  : ConcavityRule::NormalDot;
    }
};

// Flat "key = value" config file; '#' starts a comment. Every key has the same
// name as its command-line flag with dashes replaced by underscores.
inline void load_config_file(const std::string& path, RunConfig& config) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("config: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(line_no) +
                                     " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        auto as_double = [&] { return std::stod(value); };
        auto as_int = [&] { return std::stoi(value); };
        if (key == "radius_mult") config.radius_mult = as_double();
        else if (key == "chi_mult") config.chi_mult = as_double();
        else if (key == "box_mult") config.box_mult = as_double();
        else if (key == "zeta") config.zeta = as_double();
        else if (key == "zeta_factor") config.zeta_factor = as_double();
        else if (key == "psi") config.psi = as_double();
        else if (key == "psi_factor") config.psi_factor = as_double();
        else if (key == "ratio_test") config.ratio_test = as_double();
        else if (key == "min_correspondences") config.min_correspondences = as_int();
        else if (key == "ransac_tol_mult") config.ransac_tol_mult = as_double();
        else if (key == "ransac_max_iters") config.ransac_max_iters = as_int();
        else if (key == "icp_corr_mult") config.icp_corr_mult = as_double();
        else if (key == "icp_eps") config.icp_eps = as_double();
        else if (key == "icp_max_iters") config.icp_max_iters = as_int();
        else if (key == "em_tau") config.em_tau = as_double();
        else if (key == "em_max_iters") config.em_max_iters = as_int();
        else if (key == "k_max") config.k_max = as_int();
        else if (key == "cov_floor_mult") config.cov_floor_mult = as_double();
        else if (key == "min_patch_points") config.min_patch_points = as_int();
        else if (key == "min_region_points") config.min_region_points = as_int();
        else if (key == "concavity_rule") config.concavity_rule = value;
        else if (key == "normal_k") config.normal_k = as_int();
        else if (key == "sift_min_scale_mult") config.sift_min_scale_mult = as_double();
        else if (key == "sift_octaves") config.sift_octaves = as_int();
        else if (key == "sift_scales_per_octave") config.sift_scales_per_octave = as_int();
        else if (key == "sift_contrast") config.sift_contrast = as_double();
        else if (key == "nms_mult") config.nms_mult = as_double();
        else if (key == "curvature_radius_mult") config.curvature_radius_mult = as_double();
        else if (key == "max_keypoints") config.max_keypoints = as_int();
        else if (key == "seed") config.seed = std::stoull(value);
        else if (key == "threads") config.threads = as_int();
        else if (key == "report_timing") config.report_timing = (value == "1" || value == "true");
        else if (key == "report_format") config.report_format = value;
        else
            throw std::runtime_error("config: unknown key '" + key + "' on line " +
                                     std::to_string(line_no));
    }
}

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineResult {
    MatchDecision decision;
    std::optional<AlignmentResult> ransac;
    std::optional<AlignmentResult> icp;
    std::optional<MatchReport> report;
    std::vector<GMD> src_descriptors, dst_descriptors;
    std::vector<Keypoint> src_keypoints, dst_keypoints;
    std::size_t src_skipped = 0, dst_skipped = 0;
    double resolution = 0.0;
    std::string rejection_reason;  // set when the pair is turned down
    std::vector<StageTiming> timings;
    double runtime_seconds = 0.0;
    int exit_code = 1;  // 0 accepted, 2 rejected, 1 error
};

namespace detail {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record(stage, start);
            } else {
                auto value = fn();
                record(stage, start);
                return value;
            }
        } catch (const PipelineStageError&) {
            throw;
        } catch (const AlignmentFailureError&) {
            throw;  // handled by the pipeline as a rejection
        } catch (const std::exception& e) {
            throw PipelineStageError(stage, e.what());
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        sink_.push_back({stage, dt.count()});
    }

    std::vector<StageTiming>& sink_;
};

}  // namespace detail

// Algorithm-1 pipeline: detect -> describe -> match -> decide -> RANSAC ->
// ICP -> metrics. Pure given the config seed; the thread count changes only
// the wall time.
inline PipelineResult run_pipeline(const PointCloud& src_in, const PointCloud& dst_in,
                                   const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    const int threads = resolve_threads(config.threads);
    PipelineResult result;
    detail::StageClock clock(result.timings);

    PointCloud src = src_in, dst = dst_in;
    clock.run("normals", [&] {
        if (!src.has_normals()) src = estimate_normals(src, config.normal_k, threads);
        if (!dst.has_normals()) dst = estimate_normals(dst, config.normal_k, threads);
    });

    KdTree src_tree, dst_tree;
    double r = 0.0;
    clock.run("resolution", [&] {
        src_tree.build(src.positions());
        dst_tree.build(dst.positions());
        r = 0.5 * (compute_resolution(src, src_tree, threads) +
                   compute_resolution(dst, dst_tree, threads));
    });
    result.resolution = r;

    clock.run("detect", [&] {
        SiftParams sift;
        sift.min_scale = config.sift_min_scale_mult * r;
        sift.octaves = config.sift_octaves;
        sift.scales_per_octave = config.sift_scales_per_octave;
        sift.contrast_threshold = config.sift_contrast;
        sift.nms_radius = config.nms_mult * r;
        sift.curvature_radius = config.curvature_radius_mult * r;
        result.src_keypoints = detect_keypoints(src, src_tree, sift, threads);
        result.dst_keypoints = detect_keypoints(dst, dst_tree, sift, threads);
        if (config.max_keypoints > 0) {
            if (static_cast<int>(result.src_keypoints.size()) > config.max_keypoints)
                result.src_keypoints.resize(config.max_keypoints);
            if (static_cast<int>(result.dst_keypoints.size()) > config.max_keypoints)
                result.dst_keypoints.resize(config.max_keypoints);
        }
        if (result.src_keypoints.empty() || result.dst_keypoints.empty())
            throw std::runtime_error("no keypoints detected");
    });

    clock.run("describe", [&] {
        GmdParams params;
        params.support_radius = config.radius_mult * r;
        params.min_patch_points = config.min_patch_points;
        params.min_region_points = config.min_region_points;
        params.k_max = config.k_max;
        params.em_tau = config.em_tau;
        params.em_max_iters = config.em_max_iters;
        params.cov_floor = (config.cov_floor_mult * r) * (config.cov_floor_mult * r);
        params.seed = config.seed;
        params.rule = config.rule();
        auto src_res =
            describe_surface(src, src_tree, keypoint_indices(result.src_keypoints), params,
                             threads);
        auto dst_res =
            describe_surface(dst, dst_tree, keypoint_indices(result.dst_keypoints), params,
                             threads);
        result.src_descriptors = std::move(src_res.descriptors);
        result.dst_descriptors = std::move(dst_res.descriptors);
        result.src_skipped = src_res.skipped.size();
        result.dst_skipped = dst_res.skipped.size();
        if (result.src_descriptors.empty() || result.dst_descriptors.empty())
            throw std::runtime_error("no descriptors survived");
    });

    clock.run("match", [&] {
        const Eigen::MatrixXd dist =
            descriptor_distance_matrix(result.src_descriptors, result.dst_descriptors, threads);
        const double zeta =
            config.zeta > 0.0 ? config.zeta : config.zeta_factor * median_distance(dist);
        const double psi = config.psi > 0.0 ? config.psi : config.psi_factor * zeta;
        const auto corrs = match_descriptors(dist, result.src_descriptors,
                                             result.dst_descriptors, zeta, config.ratio_test);
        result.decision = decide_surface_pair(corrs, psi, config.min_correspondences, zeta);
    });

    auto reject = [&](const std::string& reason) {
        result.decision.accepted = false;
        result.rejection_reason = reason;
        result.ransac.reset();
        result.icp.reset();
        result.exit_code = 2;
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        result.runtime_seconds = dt.count();
        return result;
    };
    if (!result.decision.accepted)
        return reject("aggregate descriptor distance above psi or too few correspondences");

    // failure to find a rigid consensus means the surfaces do not match,
    // which is a rejection, not a processing error
    try {
        clock.run("ransac", [&] {
            result.ransac = ransac_align(result.decision.correspondences, src, dst,
                                         config.ransac_tol_mult * r, config.ransac_max_iters,
                                         mix_seed(config.seed, 0x52414e53));
        });
        clock.run("icp", [&] {
            result.icp = icp_refine(src, dst, result.ransac->transform,
                                    config.icp_corr_mult * r, config.icp_max_iters,
                                    config.icp_eps, threads);
        });
    } catch (const AlignmentFailureError& e) {
        return reject(e.what());
    }

    clock.run("metrics", [&] {
        const PointCloud aligned_src = apply_transform(src, result.icp->transform);
        MatchReport report;
        report.poc = poc(aligned_src, dst, config.chi_mult * r);
        const auto global_angle = aonv(aligned_src, dst);
        report.aonv = global_angle.folded_deg;
        report.aonv_raw = global_angle.raw_deg;
        const auto local_angle = local_aonv(aligned_src, dst,
                                            keypoint_indices(result.dst_keypoints),
                                            config.box_mult * r);
        report.local_aonv = local_angle.folded_deg;
        report.local_aonv_raw = local_angle.raw_deg;
        const auto angles = angle_stats(aligned_src, dst);
        report.max_angle = angles.max_deg;
        report.min_angle = angles.min_deg;
        report.mean_angle = angles.mean_deg;
        report.rmse = rmse(result.decision.correspondences, src, dst, result.icp->transform);
        result.report = report;
    });

    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    result.runtime_seconds = dt.count();
    if (config.report_timing && result.report) result.report->runtime_seconds = dt.count();
    result.exit_code = 0;
    return result;
}

// --- report serialization ----------------------------------------------------

inline nlohmann::json report_to_json(const MatchReport& report) {
    nlohmann::json j;
    j["poc"] = report.poc;
    j["aonv"] = report.aonv;
    j["aonv_raw"] = report.aonv_raw;
    j["local_aonv"] = report.local_aonv;
    j["local_aonv_raw"] = report.local_aonv_raw;
    j["max_angle"] = report.max_angle;
    j["min_angle"] = report.min_angle;
    j["mean_angle"] = report.mean_angle;
    if (report.rmse) {
        j["rmse_x"] = report.rmse->per_axis.x();
        j["rmse_y"] = report.rmse->per_axis.y();
        j["rmse_z"] = report.rmse->per_axis.z();
        j["rmse_total"] = report.rmse->total;
    } else {
        j["rmse_x"] = nullptr;
        j["rmse_y"] = nullptr;
        j["rmse_z"] = nullptr;
        j["rmse_total"] = nullptr;
    }
    j["runtime_seconds"] =
        report.runtime_seconds ? nlohmann::json(*report.runtime_seconds) : nlohmann::json();
    return j;
}

inline nlohmann::json result_to_json(const PipelineResult& result) {
    nlohmann::json j;
    j["decision"] = {
        {"accepted", result.decision.accepted},
        {"correspondence_count", result.decision.correspondences.size()},
        {"aggregate_distance", std::isfinite(result.decision.aggregate_distance)
                                   ? nlohmann::json(result.decision.aggregate_distance)
                                   : nlohmann::json()},
        {"zeta", result.decision.zeta},
        {"psi", result.decision.psi},
    };
    if (!result.rejection_reason.empty())
        j["decision"]["rejection_reason"] = result.rejection_reason;
    j["resolution"] = result.resolution;
    if (result.icp) {
        const Mat4 m = result.icp->transform.matrix();
        std::vector<double> row_major(16);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) row_major[4 * r + c] = m(r, c);
        j["alignment"] = {
            {"ransac_inlier_ratio", result.ransac ? result.ransac->ransac_inlier_ratio : 0.0},
            {"icp_iterations", result.icp->iterations_used},
            {"icp_final_error", result.icp->icp_final_error},
            {"transform_row_major", row_major},
        };
    } else {
        j["alignment"] = nullptr;
    }
    j["metrics"] = result.report ? report_to_json(*result.report) : nlohmann::json();
    return j;
}

inline void write_report_json(const PipelineResult& result, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << result_to_json(result).dump(2) << '\n';
}

inline void write_report_csv(const MatchReport& report, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << "poc,aonv,aonv_raw,local_aonv,local_aonv_raw,max_angle,min_angle,mean_angle,"
            "rmse_x,rmse_y,rmse_z,rmse_total,runtime_seconds\n";
    file << std::setprecision(17);
    file << report.poc << ',' << report.aonv << ',' << report.aonv_raw << ',' << report.local_aonv
         << ',' << report.local_aonv_raw << ',' << report.max_angle << ',' << report.min_angle
         << ',' << report.mean_angle << ',';
    if (report.rmse)
        file << report.rmse->per_axis.x() << ',' << report.rmse->per_axis.y() << ','
             << report.rmse->per_axis.z() << ',' << report.rmse->total << ',';
    else
        file << ",,,,";
    if (report.runtime_seconds) file << *report.runtime_seconds;
    file << '\n';
}

// File-level pipeline: loads both clouds, runs the match, writes the artifact
// set (gmd.bin sidecars, correspondences.csv, transform.txt, report).
inline PipelineResult run_pipeline_files(const std::string& src_path, const std::string& dst_path,
                                         const RunConfig& config, const std::string& out_dir) {
    PointCloud src, dst;
    try {
        src = load_ply(src_path);
        dst = load_ply(dst_path);
    } catch (const std::exception& e) {
        throw PipelineStageError("load", e.what());
    }
    PipelineResult result = run_pipeline(src, dst, config);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_gmd_file(result.src_descriptors, (out / "src_gmd.bin").string());
    write_gmd_file(result.dst_descriptors, (out / "dst_gmd.bin").string());
    write_correspondences_csv(result.decision.correspondences,
                              (out / "correspondences.csv").string());
    if (result.icp) write_transform(result.icp->transform, (out / "transform.txt").string());
    if (config.report_format == "json" || config.report_format == "both")
        write_report_json(result, (out / "report.json").string());
    if ((config.report_format == "csv" || config.report_format == "both") && result.report)
        write_report_csv(*result.report, (out / "report.csv").string());
    return result;
}

}  // namespace gmd
