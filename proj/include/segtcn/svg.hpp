// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal SVG timeline emitter: one horizontal bar per row, segments
// colored by class id. Output is deterministic (no timestamps).

#pragma once

#include <string>
#include <vector>

namespace segtcn {

struct TimelineRow {
    std::string label;
    std::vector<int> classes; // per-frame class ids
};

// Deterministic class color, evenly spaced hues. Returns "#rrggbb".
std::string class_color(int cls, int num_classes);

std::string timeline_svg(const std::vector<TimelineRow>& rows, int num_classes);
void write_timeline_svg(const std::string& path, const std::vector<TimelineRow>& rows,
                        int num_classes);

} // namespace segtcn
