// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Missing-keypoint robustness harness: per frame, with probability p one of
// the four extremity groups (arms and legs) is chosen uniformly and dropped
// by zeroing the confidence of every joint that belongs exclusively to that
// group. Joints shared with the torso keep their confidence; coordinates
// stay untouched. A zero-confidence joint renders as absent and silences
// any limb it terminates, so the rasterizer needs no special casing.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "segtcn/pose.hpp"

namespace segtcn {

// The droppable groups, indexed by the uniform group draw.
inline constexpr std::array<LimbGroup, 4> kDroppableGroups = {
    LimbGroup::left_arm, LimbGroup::right_arm, LimbGroup::left_leg, LimbGroup::right_leg};

// Joints used by limbs of `group` and by no limb of any other group.
std::vector<int> exclusive_group_joints(const LimbTopology& topo, LimbGroup group);

struct DropStats {
    std::int64_t frames = 0;  // Bernoulli trials (one per frame)
    std::int64_t dropped = 0; // frames that lost a group
};

// Deterministic given seed; the input sequence is left untouched. The
// topology must carry limbs in all four droppable groups.
SkeletonSequence drop_limbs(const SkeletonSequence& seq, double p, std::uint64_t seed,
                            DropStats* stats = nullptr);

} // namespace segtcn
