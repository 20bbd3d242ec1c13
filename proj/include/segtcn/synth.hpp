// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic puppet dataset. Each class is a scripted motion
// motif (arm raise, squat, lean, kick, wave) played over a 13-joint figure;
// videos are random motif sequences with per-joint coordinate noise and
// confidence jitter. Labels are exact by construction.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "segtcn/heatmap.hpp"
#include "segtcn/pose.hpp"

namespace segtcn {

inline constexpr int kPuppetJoints = 13;
inline constexpr int kMotifCount = 8;

struct SynthConfig {
    int num_videos = 5;
    int num_classes = 4; // <= kMotifCount
    int segments_per_video = 6;
    int min_segment_frames = 40;
    int max_segment_frames = 80;
    int width = 96;
    int height = 96;
    double noise_sigma = 1.0;      // additive coordinate noise, px
    double min_confidence = 0.9;   // jitter range [min_confidence, 1]
    std::uint64_t seed = 7;
};

// 13 named joints, 12 limbs tagged with the five limb groups. Elbows,
// wrists, knees, and ankles are exclusive to their arm/leg group.
LimbTopology puppet_topology();

// Motif names double as class names, index = class id.
const std::vector<std::string>& motif_names();

// Noise-free puppet pose for class `cls` at phase theta in [0, 1]. The pose
// returns to the neutral stance at both phase ends, so segment boundaries
// are smooth.
std::array<std::array<double, 2>, kPuppetJoints> motif_pose(int cls, double theta);

// Smallest over class pairs of the largest per-joint RMS trajectory
// difference. The generator refuses to emit datasets where this falls
// below 5 px.
double min_motif_separation(int num_classes);

// The second, differently-configured rasterization whose pooled features
// stand in for an auxiliary modality.
RasterConfig aux_raster_config();
int aux_encoder_grid();

struct SynthSummary {
    std::string manifest_path;
    std::string class_map_path;
    std::vector<std::string> video_ids;
    std::vector<int> frame_counts;
};

// Writes <id>.skeleton.json, <id>.labels.txt, <id>.aux.feat per video plus
// classmap.txt and manifest.json (80/20 train/test split, test at the tail)
// into out_dir.
SynthSummary generate_dataset(const SynthConfig& cfg, const std::string& out_dir);

} // namespace segtcn
