// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container: the line "SEGTCN-CKPT v1", a one-line JSON manifest
// (kind, architecture, parameter names and shapes in creation order), then
// the raw float32 little-endian parameter payload in the same order.

#pragma once

#include <string>

#include "segtcn/model.hpp"

namespace segtcn {

enum class CheckpointKind { single, fused };

// Reads just the header and manifest.
CheckpointKind checkpoint_kind(const std::string& path);

void save_checkpoint(const std::string& path, const SegModel<float>& model);
void save_checkpoint(const std::string& path, const FusionModel<float>& model);

SegModel<float> load_single_checkpoint(const std::string& path);
FusionModel<float> load_fused_checkpoint(const std::string& path);

} // namespace segtcn
