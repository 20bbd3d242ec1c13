// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace segtcn {

// Per-frame feature vectors of fixed dimension; values are row-major
// [frame][dim]. This is the network input, produced either by the built-in
// pooled-heatmap encoder or loaded from a precomputed feature file.
struct FeatureTrack {
    int dim = 0;
    std::vector<float> values;
    int frame_count() const {
        return dim == 0 ? 0 : static_cast<int>(values.size()) / dim;
    }
    const float* frame(int i) const { return values.data() + static_cast<std::size_t>(i) * dim; }
};

// File container: ASCII header "FEAT v1 <M> <D> f32le\n" followed by M*D
// little-endian 32-bit floats, frame-major.
FeatureTrack load_feature_track(const std::string& path);
void save_feature_track(const std::string& path, const FeatureTrack& track);

} // namespace segtcn
