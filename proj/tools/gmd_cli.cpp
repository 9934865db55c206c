// Command-line front end for the GMD fragment pair-matching toolkit.
//
// Subcommands: synth, describe, match, align, evaluate, pipeline.
// Exit codes: 0 success / accepted match, 2 rejected pair, 1 error.

#include "gmd/gmd.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace gmd;

namespace {

struct CliState {
    RunConfig config;
    std::string out_dir = "gmd_out";
};

void add_config_flags(CLI::App* app, CliState& state) {
    auto& c = state.config;
    app->add_option("--config", "flat key = value config file (flags override it)")
        ->type_name("FILE");
    app->add_option("--radius-mult", c.radius_mult, "descriptor support R as a multiple of r");
    app->add_option("--chi-mult", c.chi_mult, "PoC pairing distance chi as a multiple of r");
    app->add_option("--box-mult", c.box_mult, "localAoNV cube side as a multiple of r");
    app->add_option("--zeta", c.zeta, "absolute match threshold (0 = adaptive)");
    app->add_option("--zeta-factor", c.zeta_factor, "adaptive zeta = factor * median distance");
    app->add_option("--psi", c.psi, "absolute decision threshold (0 = psi-factor * zeta)");
    app->add_option("--psi-factor", c.psi_factor, "psi as a fraction of zeta");
    app->add_option("--ratio-test", c.ratio_test, "best/second-best pruning ratio");
    app->add_option("--min-correspondences", c.min_correspondences,
                    "minimum matches to accept a pair");
    app->add_option("--ransac-tol-mult", c.ransac_tol_mult, "RANSAC inlier tolerance (x r)");
    app->add_option("--ransac-max-iters", c.ransac_max_iters, "RANSAC iterations");
    app->add_option("--icp-corr-mult", c.icp_corr_mult, "ICP correspondence cap (x r)");
    app->add_option("--icp-eps", c.icp_eps, "ICP residual-change stop");
    app->add_option("--icp-max-iters", c.icp_max_iters, "ICP iterations");
    app->add_option("--em-tau", c.em_tau, "EM relative log-likelihood stop");
    app->add_option("--em-max-iters", c.em_max_iters, "EM iterations");
    app->add_option("--k-max", c.k_max, "x-means component cap per region");
    app->add_option("--cov-floor-mult", c.cov_floor_mult,
                    "covariance eigenvalue floor = (mult*r)^2");
    app->add_option("--min-patch-points", c.min_patch_points, "minimum patch size");
    app->add_option("--min-region-points", c.min_region_points, "minimum region size");
    app->add_option("--concavity-rule", c.concavity_rule, "normal_dot | plane_distance");
    app->add_option("--normal-k", c.normal_k, "neighbors for normal estimation");
    app->add_option("--sift-min-scale-mult", c.sift_min_scale_mult, "detector base scale (x r)");
    app->add_option("--sift-octaves", c.sift_octaves, "detector octaves");
    app->add_option("--sift-scales-per-octave", c.sift_scales_per_octave,
                    "detector scales per octave");
    app->add_option("--sift-contrast", c.sift_contrast, "minimum DoG response");
    app->add_option("--nms-mult", c.nms_mult, "keypoint suppression radius (x r)");
    app->add_option("--curvature-radius-mult", c.curvature_radius_mult,
                    "curvature neighborhood (x r)");
    app->add_option("--max-keypoints", c.max_keypoints, "keep strongest N keypoints (0 = all)");
    app->add_option("--seed", c.seed, "run seed");
    app->add_option("--threads", c.threads, "worker threads (0 = hardware)");
    app->add_flag("--report-timing", c.report_timing, "include wall time in the report files");
    app->add_option("--report-format", c.report_format, "json | csv | both");
    app->add_option("--out-dir", state.out_dir, "output directory");
}

// --config is applied before CLI11 assigns the remaining flags, so every
// config key can be overridden by its same-named flag.
void preload_config(int argc, char** argv, RunConfig& config) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) {
            load_config_file(argv[i + 1], config);
        } else if (arg.rfind("--config=", 0) == 0) {
            load_config_file(arg.substr(9), config);
        }
    }
}

struct Surface {
    PointCloud cloud;
    KdTree tree;
    double resolution = 0.0;
    std::vector<Keypoint> keypoints;
    DescribeResult described;
};

Surface prepare_surface(const std::string& path, const RunConfig& config) {
    Surface s;
    s.cloud = load_ply(path);
    const int threads = resolve_threads(config.threads);
    if (!s.cloud.has_normals()) s.cloud = estimate_normals(s.cloud, config.normal_k, threads);
    s.tree.build(s.cloud.positions());
    s.resolution = compute_resolution(s.cloud, s.tree, threads);

    SiftParams sift;
    sift.min_scale = config.sift_min_scale_mult * s.resolution;
    sift.octaves = config.sift_octaves;
    sift.scales_per_octave = config.sift_scales_per_octave;
    sift.contrast_threshold = config.sift_contrast;
    sift.nms_radius = config.nms_mult * s.resolution;
    sift.curvature_radius = config.curvature_radius_mult * s.resolution;
    s.keypoints = detect_keypoints(s.cloud, s.tree, sift, threads);
    if (config.max_keypoints > 0 &&
        static_cast<int>(s.keypoints.size()) > config.max_keypoints)
        s.keypoints.resize(config.max_keypoints);
    return s;
}

GmdParams gmd_params_for(const RunConfig& config, double resolution) {
    GmdParams p;
    p.support_radius = config.radius_mult * resolution;
    p.min_patch_points = config.min_patch_points;
    p.min_region_points = config.min_region_points;
    p.k_max = config.k_max;
    p.em_tau = config.em_tau;
    p.em_max_iters = config.em_max_iters;
    p.cov_floor = (config.cov_floor_mult * resolution) * (config.cov_floor_mult * resolution);
    p.seed = config.seed;
    p.rule = config.rule();
    return p;
}

void describe_in_place(Surface& s, const RunConfig& config) {
    s.described = describe_surface(s.cloud, s.tree, keypoint_indices(s.keypoints),
                                   gmd_params_for(config, s.resolution),
                                   resolve_threads(config.threads));
}

std::vector<GMD> load_descriptors(const std::string& path, const RunConfig& config,
                                  double* resolution_out) {
    if (fs::path(path).extension() == ".bin") {
        if (resolution_out) *resolution_out = 0.0;
        return read_gmd_file(path);
    }
    Surface s = prepare_surface(path, config);
    describe_in_place(s, config);
    if (resolution_out) *resolution_out = s.resolution;
    return std::move(s.described.descriptors);
}

void print_skip_summary(const DescribeResult& described) {
    std::map<std::string, int> counts;
    for (const auto& [kp, reason] : described.skipped) counts[skip_reason_name(reason)]++;
    for (const auto& [name, count] : counts)
        std::cout << "  skipped " << count << " keypoint(s): " << name << "\n";
}

int cmd_synth(const CliState& state, const SynthConfig& synth_config, double noise_sigma_mult,
              int abrasion_defects, double defect_radius_mult, double downsample_keep) {
    fs::create_directories(state.out_dir);
    auto [a, b, gt] = generate_fragment_pair(synth_config);
    const double r = compute_resolution(a, resolve_threads(state.config.threads));

    if (noise_sigma_mult > 0.0) {
        a = add_gaussian_noise(a, noise_sigma_mult * r, mix_seed(synth_config.seed, 101),
                               state.config.normal_k, resolve_threads(state.config.threads));
        b = add_gaussian_noise(b, noise_sigma_mult * r, mix_seed(synth_config.seed, 102),
                               state.config.normal_k, resolve_threads(state.config.threads));
    }
    if (abrasion_defects > 0)
        a = apply_abrasion(a, abrasion_defects, defect_radius_mult * r,
                           mix_seed(synth_config.seed, 103));
    if (downsample_keep < 1.0) b = downsample(b, downsample_keep, mix_seed(synth_config.seed, 104));

    const fs::path out(state.out_dir);
    save_ply(a, (out / "a.ply").string());
    save_ply(b, (out / "b.ply").string());
    std::map<std::string, std::string> echo = {
        {"extent", std::to_string(synth_config.extent)},
        {"spacing", std::to_string(synth_config.spacing)},
        {"bumps", std::to_string(synth_config.bumps)},
        {"bump_amplitude", std::to_string(synth_config.bump_amplitude)},
        {"jitter", std::to_string(synth_config.jitter)},
        {"overlap_fraction", std::to_string(synth_config.overlap_fraction)},
        {"seed", std::to_string(synth_config.seed)},
        {"noise_sigma_mult", std::to_string(noise_sigma_mult)},
        {"abrasion_defects", std::to_string(abrasion_defects)},
        {"defect_radius_mult", std::to_string(defect_radius_mult)},
        {"downsample_keep", std::to_string(downsample_keep)},
        {"resolution", std::to_string(r)},
    };
    write_ground_truth(gt.transform, echo, (out / "gt.txt").string());
    std::cout << "wrote " << (out / "a.ply").string() << " (" << a.size() << " points), "
              << (out / "b.ply").string() << " (" << b.size() << " points), gt.txt\n";
    return 0;
}

int cmd_describe(const CliState& state, const std::string& cloud_path,
                 const std::string& keypoints_csv, const std::string& csv_out,
                 const std::string& labels_csv) {
    Surface s = prepare_surface(cloud_path, state.config);
    describe_in_place(s, state.config);
    fs::create_directories(state.out_dir);
    const fs::path out(state.out_dir);

    const std::string bin_path = (out / (fs::path(cloud_path).stem().string() + "_gmd.bin"))
                                     .string();
    write_gmd_file(s.described.descriptors, bin_path);
    if (!csv_out.empty()) write_gmd_csv(s.described.descriptors, csv_out);
    if (!keypoints_csv.empty()) write_keypoints_csv(s.cloud, s.keypoints, keypoints_csv);
    if (!labels_csv.empty()) {
        std::ofstream file(labels_csv);
        file << "keypoint,point_index,label\n";
        const auto params = gmd_params_for(state.config, s.resolution);
        for (const auto& d : s.described.descriptors) {
            const auto [indices, labels] = compute_patch_labels(s.cloud, s.tree, d.keypoint,
                                                                params);
            for (std::size_t i = 0; i < labels.size(); ++i)
                file << d.keypoint << ',' << indices[i] << ','
                     << static_cast<int>(labels[i]) << '\n';
        }
    }
    std::cout << s.cloud.source_id << ": " << s.cloud.size() << " points, resolution "
              << s.resolution << ", " << s.keypoints.size() << " keypoints, "
              << s.described.descriptors.size() << " descriptors -> " << bin_path << "\n";
    print_skip_summary(s.described);
    return s.described.descriptors.empty() ? 1 : 0;
}

int cmd_match(const CliState& state, const std::string& src_path, const std::string& dst_path) {
    const auto src = load_descriptors(src_path, state.config, nullptr);
    const auto dst = load_descriptors(dst_path, state.config, nullptr);
    if (src.empty() || dst.empty()) throw std::runtime_error("no descriptors to match");

    const auto dist =
        descriptor_distance_matrix(src, dst, resolve_threads(state.config.threads));
    const double zeta = state.config.zeta > 0.0
                            ? state.config.zeta
                            : state.config.zeta_factor * median_distance(dist);
    const double psi = state.config.psi > 0.0 ? state.config.psi : state.config.psi_factor * zeta;
    const auto corrs = match_descriptors(dist, src, dst, zeta, state.config.ratio_test);
    const auto decision = decide_surface_pair(corrs, psi, state.config.min_correspondences, zeta);

    fs::create_directories(state.out_dir);
    write_correspondences_csv(corrs, (fs::path(state.out_dir) / "correspondences.csv").string());
    std::cout << (decision.accepted ? "accepted" : "rejected") << ": "
              << corrs.size() << " correspondence(s), aggregate "
              << decision.aggregate_distance << ", zeta " << zeta << ", psi " << psi << "\n";
    return decision.accepted ? 0 : 2;
}

int cmd_align(const CliState& state, const std::string& src_path, const std::string& dst_path,
              const std::string& corr_path) {
    const PointCloud src = load_ply(src_path);
    const PointCloud dst = load_ply(dst_path);
    const auto corrs = read_correspondences_csv(corr_path);
    const int threads = resolve_threads(state.config.threads);
    const double r =
        0.5 * (compute_resolution(src, threads) + compute_resolution(dst, threads));

    const auto ransac = ransac_align(corrs, src, dst, state.config.ransac_tol_mult * r,
                                     state.config.ransac_max_iters,
                                     mix_seed(state.config.seed, 0x52414e53));
    const auto icp = icp_refine(src, dst, ransac.transform, state.config.icp_corr_mult * r,
                                state.config.icp_max_iters, state.config.icp_eps, threads);

    fs::create_directories(state.out_dir);
    const std::string transform_path = (fs::path(state.out_dir) / "transform.txt").string();
    write_transform(icp.transform, transform_path);
    std::cout << "ransac inlier ratio " << ransac.ransac_inlier_ratio << ", icp "
              << icp.iterations_used << " iteration(s), final error " << icp.icp_final_error
              << " -> " << transform_path << "\n";
    return 0;
}

int cmd_evaluate(const CliState& state, const std::string& src_path, const std::string& dst_path,
                 const std::string& transform_path, const std::string& corr_path,
                 const std::string& gt_path, const std::string& pr_out) {
    const RunConfig& config = state.config;
    const int threads = resolve_threads(config.threads);
    PointCloud src = load_ply(src_path);
    PointCloud dst = load_ply(dst_path);
    if (!src.has_normals()) src = estimate_normals(src, config.normal_k, threads);
    if (!dst.has_normals()) dst = estimate_normals(dst, config.normal_k, threads);
    const RigidTransform transform = read_transform(transform_path);
    const double r =
        0.5 * (compute_resolution(src, threads) + compute_resolution(dst, threads));

    Surface dst_surface;
    dst_surface.cloud = dst;
    dst_surface.tree.build(dst.positions());
    SiftParams sift = default_sift_params(r);
    sift.min_scale = config.sift_min_scale_mult * r;
    sift.octaves = config.sift_octaves;
    sift.scales_per_octave = config.sift_scales_per_octave;
    sift.contrast_threshold = config.sift_contrast;
    sift.nms_radius = config.nms_mult * r;
    sift.curvature_radius = config.curvature_radius_mult * r;
    auto dst_keypoints = detect_keypoints(dst, dst_surface.tree, sift, threads);
    if (config.max_keypoints > 0 &&
        static_cast<int>(dst_keypoints.size()) > config.max_keypoints)
        dst_keypoints.resize(config.max_keypoints);

    const PointCloud aligned_src = apply_transform(src, transform);
    MatchReport report;
    report.poc = poc(aligned_src, dst, config.chi_mult * r);
    const auto global_angle = aonv(aligned_src, dst);
    report.aonv = global_angle.folded_deg;
    report.aonv_raw = global_angle.raw_deg;
    const auto local_angle =
        local_aonv(aligned_src, dst, keypoint_indices(dst_keypoints), config.box_mult * r);
    report.local_aonv = local_angle.folded_deg;
    report.local_aonv_raw = local_angle.raw_deg;
    const auto angles = angle_stats(aligned_src, dst);
    report.max_angle = angles.max_deg;
    report.min_angle = angles.min_deg;
    report.mean_angle = angles.mean_deg;

    std::vector<Correspondence> corrs;
    if (!corr_path.empty()) {
        corrs = read_correspondences_csv(corr_path);
        if (!corrs.empty()) report.rmse = rmse(corrs, src, dst, transform);
    }

    fs::create_directories(state.out_dir);
    PipelineResult shell;
    shell.report = report;
    shell.resolution = r;
    if (config.report_format == "json" || config.report_format == "both")
        write_report_json(shell, (fs::path(state.out_dir) / "report.json").string());
    if (config.report_format == "csv" || config.report_format == "both")
        write_report_csv(report, (fs::path(state.out_dir) / "report.csv").string());

    std::cout << "PoC " << report.poc << "%, AoNV " << report.aonv << " (raw "
              << report.aonv_raw << "), localAoNV " << report.local_aonv << ", MaA/MiA/MeA "
              << report.max_angle << "/" << report.min_angle << "/" << report.mean_angle << "\n";
    if (report.rmse)
        std::cout << "RMSE xyz " << report.rmse->per_axis.transpose() << ", total "
                  << report.rmse->total << "\n";

    if (!gt_path.empty()) {
        const auto [gt_transform, kv] = read_ground_truth(gt_path);
        std::cout << "vs ground truth: rotation error "
                  << rotation_angle_deg(transform.rotation, gt_transform.rotation)
                  << " deg, translation error "
                  << (transform.translation - gt_transform.translation).norm() << "\n";
        if (!pr_out.empty() && !corrs.empty()) {
            Surface src_surface;
            src_surface.cloud = src;
            src_surface.tree.build(src.positions());
            auto src_keypoints = detect_keypoints(src, src_surface.tree, sift, threads);
            GroundTruth gt;
            gt.transform = gt_transform;
            const auto pairs =
                populate_keypoint_pairs(gt, src, dst, keypoint_indices(src_keypoints),
                                        keypoint_indices(dst_keypoints), 2.0 * r);
            if (pairs.empty()) throw std::runtime_error("pr curve: no ground-truth pairs");
            std::vector<double> thresholds;
            double max_d = 0.0;
            for (const auto& c : corrs) max_d = std::max(max_d, c.distance);
            for (int i = 1; i <= 20; ++i) thresholds.push_back(max_d * i / 20.0);
            const auto curve =
                pr_curve(corrs, pairs, gt_transform, src, dst, 2.0 * r, thresholds);
            write_pr_csv(curve, pr_out);
            std::cout << "wrote PR curve (" << pairs.size() << " ground-truth pairs) -> "
                      << pr_out << "\n";
        }
    }
    return 0;
}

int cmd_pipeline(const CliState& state, const std::string& src_path,
                 const std::string& dst_path) {
    const PipelineResult result =
        run_pipeline_files(src_path, dst_path, state.config, state.out_dir);
    std::cout << "resolution " << result.resolution << ", keypoints "
              << result.src_keypoints.size() << "/" << result.dst_keypoints.size()
              << ", descriptors " << result.src_descriptors.size() << "/"
              << result.dst_descriptors.size() << "\n";
    std::cout << (result.decision.accepted ? "accepted" : "rejected") << ": "
              << result.decision.correspondences.size() << " correspondence(s), aggregate "
              << result.decision.aggregate_distance << " (zeta " << result.decision.zeta
              << ", psi " << result.decision.psi << ")\n";
    if (result.report) {
        std::cout << "PoC " << result.report->poc << "%, AoNV " << result.report->aonv
                  << ", localAoNV " << result.report->local_aonv << ", MeA "
                  << result.report->mean_angle << "\n";
    }
    for (const auto& t : result.timings)
        std::cout << "  " << t.stage << ": " << t.seconds << " s\n";
    std::cout << "total " << result.runtime_seconds << " s, artifacts in " << state.out_dir
              << "\n";
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GMD fragment pair matching: descriptors, matching, alignment, evaluation"};
    app.require_subcommand(1);

    CliState state;

    // synth
    SynthConfig synth_config;
    double rot_deg = 0.0;
    std::vector<double> rot_axis{0.0, 0.0, 1.0};
    std::vector<double> translate{0.0, 0.0, 0.0};
    double noise_sigma_mult = 0.0, defect_radius_mult = 4.0, downsample_keep = 1.0;
    int abrasion_defects = 0;
    auto* synth = app.add_subcommand("synth", "generate a synthetic fragment pair");
    add_config_flags(synth, state);
    synth->add_option("--extent", synth_config.extent, "surface side length");
    synth->add_option("--spacing", synth_config.spacing, "sampling step");
    synth->add_option("--bumps", synth_config.bumps, "number of Gaussian bumps");
    synth->add_option("--bump-amplitude", synth_config.bump_amplitude, "max bump height");
    synth->add_option("--bump-sigma-min", synth_config.bump_sigma_min, "min bump width");
    synth->add_option("--bump-sigma-max", synth_config.bump_sigma_max, "max bump width");
    synth->add_option("--jitter", synth_config.jitter, "sampling jitter (fraction of spacing)");
    synth->add_option("--overlap", synth_config.overlap_fraction, "overlap fraction in (0,1]");
    synth->add_option("--synth-seed", synth_config.seed, "generator seed");
    synth->add_option("--rot-deg", rot_deg, "planted rotation angle");
    synth->add_option("--rot-axis", rot_axis, "planted rotation axis")->expected(3);
    synth->add_option("--translate", translate, "planted translation")->expected(3);
    synth->add_option("--noise-sigma-mult", noise_sigma_mult, "Gaussian noise sigma (x r)");
    synth->add_option("--abrasion-defects", abrasion_defects, "defects removed from cloud A");
    synth->add_option("--defect-radius-mult", defect_radius_mult, "defect radius (x r)");
    synth->add_option("--downsample-keep", downsample_keep, "keep fraction for cloud B");

    // describe
    std::string cloud_path, keypoints_csv, gmd_csv, labels_csv;
    auto* describe = app.add_subcommand("describe", "detect keypoints and emit GMD sidecar");
    add_config_flags(describe, state);
    describe->add_option("cloud", cloud_path, "input PLY")->required();
    describe->add_option("--keypoints-csv", keypoints_csv, "export keypoints as CSV");
    describe->add_option("--csv-out", gmd_csv, "export descriptors as CSV");
    describe->add_option("--labels-csv", labels_csv, "export concavity labels as CSV");

    // match
    std::string src_path, dst_path;
    auto* match = app.add_subcommand("match", "match descriptors of two surfaces");
    add_config_flags(match, state);
    match->add_option("source", src_path, "source PLY or _gmd.bin sidecar")->required();
    match->add_option("target", dst_path, "target PLY or _gmd.bin sidecar")->required();

    // align
    std::string align_src, align_dst, corr_path;
    auto* align = app.add_subcommand("align", "RANSAC + ICP from correspondences");
    add_config_flags(align, state);
    align->add_option("source", align_src, "source PLY")->required();
    align->add_option("target", align_dst, "target PLY")->required();
    align->add_option("--correspondences", corr_path, "correspondences.csv")->required();

    // evaluate
    std::string eval_src, eval_dst, eval_transform, eval_corrs, eval_gt, pr_out;
    auto* evaluate = app.add_subcommand("evaluate", "compute the metric suite for an alignment");
    add_config_flags(evaluate, state);
    evaluate->add_option("source", eval_src, "source PLY")->required();
    evaluate->add_option("target", eval_dst, "target PLY")->required();
    evaluate->add_option("--transform", eval_transform, "transform.txt")->required();
    evaluate->add_option("--correspondences", eval_corrs, "correspondences.csv (enables RMSE)");
    evaluate->add_option("--ground-truth", eval_gt, "gt.txt (enables error vs truth)");
    evaluate->add_option("--pr-out", pr_out, "write a precision/recall curve CSV");

    // pipeline
    std::string pipe_src, pipe_dst;
    auto* pipeline = app.add_subcommand("pipeline", "full match/align/evaluate run");
    add_config_flags(pipeline, state);
    pipeline->add_option("source", pipe_src, "source PLY")->required();
    pipeline->add_option("target", pipe_dst, "target PLY")->required();

    try {
        preload_config(argc, argv, state.config);
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        state.config.validate();
        if (synth->parsed()) {
            if (rot_deg != 0.0) {
                const Vec3 axis = Vec3(rot_axis[0], rot_axis[1], rot_axis[2]).normalized();
                synth_config.transform.rotation =
                    Eigen::AngleAxisd(rot_deg * M_PI / 180.0, axis).toRotationMatrix();
            }
            synth_config.transform.translation = Vec3(translate[0], translate[1], translate[2]);
            return cmd_synth(state, synth_config, noise_sigma_mult, abrasion_defects,
                             defect_radius_mult, downsample_keep);
        }
        if (describe->parsed())
            return cmd_describe(state, cloud_path, keypoints_csv, gmd_csv, labels_csv);
        if (match->parsed()) return cmd_match(state, src_path, dst_path);
        if (align->parsed()) return cmd_align(state, align_src, align_dst, corr_path);
        if (evaluate->parsed())
            return cmd_evaluate(state, eval_src, eval_dst, eval_transform, eval_corrs, eval_gt,
                                pr_out);
        if (pipeline->parsed()) return cmd_pipeline(state, pipe_src, pipe_dst);
    } catch (const PipelineStageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
