// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "segtcn/error.hpp"
#include "segtcn/features.hpp"
#include "segtcn/rng.hpp"

namespace segtcn {

namespace {

enum JointId {
    kHead, kNeck, kLShoulder, kRShoulder, kLElbow, kRElbow, kLWrist, kRWrist,
    kHip, kLKnee, kRKnee, kLAnkle, kRAnkle
};

constexpr double kBasePose[kPuppetJoints][2] = {
    {48, 16}, {48, 25}, {40, 28}, {56, 28}, {36, 40}, {60, 40}, {34, 52},
    {62, 52}, {48, 50}, {43, 66}, {53, 66}, {43, 82}, {53, 82},
};

constexpr double kPi = 3.14159265358979323846;

} // namespace

LimbTopology puppet_topology() {
    LimbTopology topo;
    topo.joint_names = {"head", "neck", "l_shoulder", "r_shoulder", "l_elbow",
                        "r_elbow", "l_wrist", "r_wrist", "hip", "l_knee",
                        "r_knee", "l_ankle", "r_ankle"};
    const auto th = LimbGroup::torso_head;
    const auto la = LimbGroup::left_arm;
    const auto ra = LimbGroup::right_arm;
    const auto ll = LimbGroup::left_leg;
    const auto rl = LimbGroup::right_leg;
    topo.limbs = {
        {kHead, kNeck, th},      {kNeck, kLShoulder, th}, {kNeck, kRShoulder, th},
        {kNeck, kHip, th},       {kLShoulder, kLElbow, la}, {kLElbow, kLWrist, la},
        {kRShoulder, kRElbow, ra}, {kRElbow, kRWrist, ra},  {kHip, kLKnee, ll},
        {kLKnee, kLAnkle, ll},   {kHip, kRKnee, rl},      {kRKnee, kRAnkle, rl},
    };
    return topo;
}

const std::vector<std::string>& motif_names() {
    static const std::vector<std::string> names = {
        "raise-left-arm", "raise-right-arm", "squat",     "lean-left",
        "lean-right",     "kick-left",       "kick-right", "wave-both-arms",
    };
    return names;
}

std::array<std::array<double, 2>, kPuppetJoints> motif_pose(int cls, double theta) {
    if (cls < 0 || cls >= kMotifCount) throw ValidationError("motif class out of range");
    std::array<std::array<double, 2>, kPuppetJoints> p;
    for (int k = 0; k < kPuppetJoints; ++k) p[k] = {kBasePose[k][0], kBasePose[k][1]};
    // Half-sine envelope: zero at both phase ends, so every segment starts
    // and ends at the neutral stance.
    const double s = std::sin(kPi * theta);
    switch (cls) {
        case 0: // raise-left-arm
            p[kLWrist][0] -= 2 * s;  p[kLWrist][1] -= 32 * s;
            p[kLElbow][0] -= 1 * s;  p[kLElbow][1] -= 16 * s;
            break;
        case 1: // raise-right-arm
            p[kRWrist][0] += 2 * s;  p[kRWrist][1] -= 32 * s;
            p[kRElbow][0] += 1 * s;  p[kRElbow][1] -= 16 * s;
            break;
        case 2: // squat
            for (int k : {kHead, kNeck, kLShoulder, kRShoulder, kLElbow, kRElbow,
                          kLWrist, kRWrist, kHip})
                p[k][1] += 12 * s;
            p[kLKnee][0] -= 3 * s;  p[kLKnee][1] += 6 * s;
            p[kRKnee][0] += 3 * s;  p[kRKnee][1] += 6 * s;
            break;
        case 3:   // lean-left
        case 4: { // lean-right
            const double dir = cls == 3 ? -1.0 : 1.0;
            const double w[] = {1.0, 0.85, 0.8, 0.8, 0.55, 0.55, 0.35, 0.35, 0.15};
            const int upper[] = {kHead, kNeck, kLShoulder, kRShoulder, kLElbow,
                                 kRElbow, kLWrist, kRWrist, kHip};
            for (int i = 0; i < 9; ++i) p[upper[i]][0] += dir * 14 * w[i] * s;
            break;
        }
        case 5: // kick-left
            p[kLAnkle][0] -= 10 * s;  p[kLAnkle][1] -= 20 * s;
            p[kLKnee][0] -= 5 * s;    p[kLKnee][1] -= 9 * s;
            break;
        case 6: // kick-right
            p[kRAnkle][0] += 10 * s;  p[kRAnkle][1] -= 20 * s;
            p[kRKnee][0] += 5 * s;    p[kRKnee][1] -= 9 * s;
            break;
        case 7: // wave-both-arms
            for (int k : {kLWrist, kRWrist}) p[k][1] -= 24 * s;
            for (int k : {kLElbow, kRElbow}) p[k][1] -= 10 * s;
            p[kLWrist][0] -= 6 * std::sin(4 * kPi * theta) * s;
            p[kRWrist][0] += 6 * std::sin(4 * kPi * theta) * s;
            break;
    }
    return p;
}

double min_motif_separation(int num_classes) {
    if (num_classes < 2 || num_classes > kMotifCount)
        throw ValidationError("class count must lie in [2, " +
                              std::to_string(kMotifCount) + "]");
    const int samples = 64;
    double worst = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_classes; ++a) {
        for (int b = a + 1; b < num_classes; ++b) {
            double best_joint = 0.0;
            std::array<double, kPuppetJoints> acc{};
            for (int t = 0; t < samples; ++t) {
                const double theta = (t + 0.5) / samples;
                const auto pa = motif_pose(a, theta);
                const auto pb = motif_pose(b, theta);
                for (int k = 0; k < kPuppetJoints; ++k) {
                    const double dx = pa[k][0] - pb[k][0];
                    const double dy = pa[k][1] - pb[k][1];
                    acc[k] += dx * dx + dy * dy;
                }
            }
            for (int k = 0; k < kPuppetJoints; ++k)
                best_joint = std::max(best_joint, std::sqrt(acc[k] / samples));
            worst = std::min(worst, best_joint);
        }
    }
    return worst;
}

RasterConfig aux_raster_config() {
    RasterConfig cfg;
    cfg.sigma = 1.5;
    cfg.out_size = 28;
    cfg.crop_padding = 4;
    cfg.distance_mode = DistanceMode::squared;
    return cfg;
}

int aux_encoder_grid() { return 4; }

SynthSummary generate_dataset(const SynthConfig& cfg, const std::string& out_dir) {
    if (cfg.num_videos < 1) throw ValidationError("need at least one video");
    if (cfg.num_classes < 2) throw ValidationError("need at least two classes");
    if (cfg.num_classes > kMotifCount)
        throw ValidationError("at most " + std::to_string(kMotifCount) +
                              " classes are scripted");
    if (cfg.segments_per_video < 1) throw ValidationError("need at least one segment");
    if (cfg.min_segment_frames < 1 || cfg.max_segment_frames < cfg.min_segment_frames)
        throw ValidationError("bad segment frame range");
    if (cfg.width < 8 || cfg.height < 8) throw ValidationError("canvas too small");
    if (cfg.noise_sigma < 0.0) throw ValidationError("noise sigma cannot be negative");
    if (cfg.min_confidence < 0.0 || cfg.min_confidence > 1.0)
        throw ValidationError("confidence floor must lie in [0, 1]");

    const double separation = min_motif_separation(cfg.num_classes);
    if (separation < 5.0)
        throw RuntimeError("motif separation self-check failed: " +
                           std::to_string(separation) + " px RMS");

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    const LimbTopology topo = puppet_topology();
    ClassMap class_map;
    class_map.names.assign(motif_names().begin(),
                           motif_names().begin() + cfg.num_classes);

    SynthSummary summary;
    summary.class_map_path = (fs::path(out_dir) / "classmap.txt").string();
    save_class_map(summary.class_map_path, class_map);

    const RasterConfig aux_cfg = aux_raster_config();
    std::vector<ManifestEntry> entries;
    for (int v = 0; v < cfg.num_videos; ++v) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(v)));
        SkeletonSequence seq;
        seq.width = cfg.width;
        seq.height = cfg.height;
        seq.topology = topo;
        std::vector<int> labels;
        int prev_cls = -1;
        for (int s = 0; s < cfg.segments_per_video; ++s) {
            int cls = static_cast<int>(rng.below(cfg.num_classes));
            while (cls == prev_cls) cls = static_cast<int>(rng.below(cfg.num_classes));
            prev_cls = cls;
            const int span = cfg.max_segment_frames - cfg.min_segment_frames + 1;
            const int len = cfg.min_segment_frames + static_cast<int>(rng.below(span));
            for (int t = 0; t < len; ++t) {
                const auto pose = motif_pose(cls, static_cast<double>(t) / len);
                std::vector<Joint> frame(kPuppetJoints);
                for (int k = 0; k < kPuppetJoints; ++k) {
                    frame[k].x = pose[k][0] + rng.normal(0.0, cfg.noise_sigma);
                    frame[k].y = pose[k][1] + rng.normal(0.0, cfg.noise_sigma);
                    frame[k].c = rng.uniform(cfg.min_confidence, 1.0);
                }
                seq.frames.push_back(std::move(frame));
                labels.push_back(cls);
            }
        }
        validate_sequence(seq);

        char id[16];
        std::snprintf(id, sizeof(id), "vid%03d", v);
        const std::string skel_name = std::string(id) + ".skeleton.json";
        const std::string label_name = std::string(id) + ".labels.txt";
        const std::string feat_name = std::string(id) + ".aux.feat";
        save_skeleton_sequence((fs::path(out_dir) / skel_name).string(), seq);

        LabelTrack track;
        track.labels = labels;
        track.class_names = class_map.names;
        save_label_track((fs::path(out_dir) / label_name).string(), track);

        const HeatmapClip aux_clip = rasterize_pipeline(seq, aux_cfg, HeatmapMode::combined);
        const FeatureTrack aux = pooled_encoder(aux_clip, aux_encoder_grid());
        save_feature_track((fs::path(out_dir) / feat_name).string(), aux);

        entries.push_back({id, skel_name, label_name, feat_name, "train"});
        summary.video_ids.push_back(id);
        summary.frame_counts.push_back(seq.frame_count());
    }

    // 80/20 split with the test videos at the tail; a lone video stays in
    // the train split.
    const int n_test = cfg.num_videos >= 2 ? std::max(1, cfg.num_videos / 5) : 0;
    for (int v = cfg.num_videos - n_test; v < cfg.num_videos; ++v)
        entries[static_cast<std::size_t>(v)].split = "test";

    summary.manifest_path = (fs::path(out_dir) / "manifest.json").string();
    save_manifest(summary.manifest_path, entries);
    return summary;
}

} // namespace segtcn
