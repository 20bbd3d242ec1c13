// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Gaussian joint/limb heatmap rasterization and the crop/sum/resize/
// replicate pipeline. Heatmap values at pixel (i, j) with integer centers:
//   joint k: exp(-((i-x_k)^2 + (j-y_k)^2) / (2 sigma^2)) * c_k
//   limb  l: exp(-D / (2 sigma^2)) * min(c_a, c_b)
// where D is the point-to-segment distance (linear mode) or its square
// (squared mode). Distances are computed in 64-bit and narrowed to float
// before the exponential kernel.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "segtcn/features.hpp"
#include "segtcn/pose.hpp"

namespace segtcn {

enum class DistanceMode { linear, squared };

struct RasterConfig {
    double sigma = 0.6;
    int out_size = 56;
    int replicate_channels = 3;
    int crop_padding = 2;
    DistanceMode distance_mode = DistanceMode::linear;
};

enum class HeatmapMode { joint, limb, combined };

const char* heatmap_mode_name(HeatmapMode mode);
HeatmapMode parse_heatmap_mode(const std::string& name); // "joint", "limb", "joint+limb"

// Frames are channel-major: frames[m][ch*h*w + row*w + col], all in [0,1].
struct HeatmapClip {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::vector<float>> frames;
    int frame_count() const { return static_cast<int>(frames.size()); }
    const float* channel(int frame, int ch) const {
        return frames[frame].data() + static_cast<std::size_t>(ch) * height * width;
    }
};

// Inclusive pixel box [x0,x1] x [y0,y1].
struct CropBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

HeatmapClip joint_heatmap(const SkeletonSequence& seq, const RasterConfig& cfg);
HeatmapClip limb_heatmap(const SkeletonSequence& seq, const RasterConfig& cfg);
HeatmapClip combined_heatmap(const SkeletonSequence& seq, const RasterConfig& cfg);

// Joint bounding box over every confident joint of the whole video,
// padded by crop_padding and clamped to the frame.
CropBox video_crop_box(const SkeletonSequence& seq, const RasterConfig& cfg);

// Crop to box, sum channels, renormalize by the per-video peak (guarded by
// 1e-12), bilinear-resize to out_size, replicate channels.
HeatmapClip collapse_and_resize(const HeatmapClip& clip, const CropBox& box,
                                const RasterConfig& cfg);

// Streaming equivalent of combined/joint/limb heatmap followed by
// collapse_and_resize, rasterizing only inside the crop box; bit-identical
// to the composed ops.
HeatmapClip rasterize_pipeline(const SkeletonSequence& seq, const RasterConfig& cfg,
                               HeatmapMode mode);

// Average-pools channel 0 of each (square) frame into grid x grid cells,
// flattened row-major into a feature vector of dimension grid^2.
FeatureTrack pooled_encoder(const HeatmapClip& clip, int grid = 8);

// Bilinear resampling with half-pixel center alignment and edge clamping.
void bilinear_resize(const float* src, int src_w, int src_h, float* dst,
                     int dst_w, int dst_h);

// Raster container: ASCII header "HMAP v1 <M> <h> <w> <ch> f32le\n" followed
// by row-major [frame][row][col][channel] little-endian 32-bit floats.
void save_hmap(const std::string& path, const HeatmapClip& clip);
HeatmapClip load_hmap(const std::string& path);

} // namespace segtcn
