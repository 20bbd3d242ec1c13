// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/perturb.hpp"

#include <set>

#include "segtcn/error.hpp"
#include "segtcn/rng.hpp"

namespace segtcn {

std::vector<int> exclusive_group_joints(const LimbTopology& topo, LimbGroup group) {
    std::set<int> in_group, elsewhere;
    for (const Limb& limb : topo.limbs) {
        auto& bucket = limb.group == group ? in_group : elsewhere;
        bucket.insert(limb.a);
        bucket.insert(limb.b);
    }
    std::vector<int> out;
    for (int j : in_group)
        if (!elsewhere.count(j)) out.push_back(j);
    return out;
}

SkeletonSequence drop_limbs(const SkeletonSequence& seq, double p, std::uint64_t seed,
                            DropStats* stats) {
    if (p < 0.0 || p > 1.0) throw ValidationError("drop probability must lie in [0, 1]");
    validate_sequence(seq);

    std::array<std::vector<int>, kDroppableGroups.size()> victims;
    for (std::size_t g = 0; g < kDroppableGroups.size(); ++g) {
        bool tagged = false;
        for (const Limb& limb : seq.topology.limbs)
            if (limb.group == kDroppableGroups[g]) tagged = true;
        if (!tagged)
            throw ValidationError(std::string("topology has no limbs in group ") +
                                  limb_group_name(kDroppableGroups[g]));
        victims[g] = exclusive_group_joints(seq.topology, kDroppableGroups[g]);
    }

    SkeletonSequence out = seq;
    Rng rng(seed);
    std::int64_t dropped = 0;
    for (auto& frame : out.frames) {
        if (!(rng.uniform01() < p)) continue;
        ++dropped;
        const auto& joints = victims[rng.below(kDroppableGroups.size())];
        for (int j : joints) frame[static_cast<std::size_t>(j)].c = 0.0;
    }
    if (stats) {
        stats->frames = static_cast<std::int64_t>(out.frames.size());
        stats->dropped = dropped;
    }
    return out;
}

} // namespace segtcn
