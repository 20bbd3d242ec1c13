// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON-backed run configuration aggregating rasterizer, encoder, model,
// loss, and training settings. Parsing is strict: unknown keys are
// rejected, and missing keys fall back to the defaults below.

#pragma once

#include <string>

#include "segtcn/heatmap.hpp"
#include "segtcn/losses.hpp"
#include "segtcn/model.hpp"

namespace segtcn {

struct TrainConfig {
    double lr = 0.001;
    double lr_stage2 = 0.0005; // fusion stage-ii learning rate
    int epochs = 100;
    int epochs_stage2 = 100;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct RunConfig {
    RasterConfig raster;
    // 8x8 pooling over the 56 px raster: D = 64 matches the model's
    // default input width.
    int encoder_grid = 8;
    ModelConfig model; // input_dim and num_classes are derived from the data
    LossConfig loss;
    TrainConfig train;
    FusionMode fusion_mode = FusionMode::recurrent;
    bool supervise_branches = false;
};

RunConfig default_run_config();
void validate_run_config(const RunConfig& cfg);

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);
RunConfig parse_run_config_json(const std::string& text); // for tests and embedding
std::string run_config_json(const RunConfig& cfg);

} // namespace segtcn
