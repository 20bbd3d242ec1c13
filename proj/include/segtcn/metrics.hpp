// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Segmentation metrics. All four return percentages in [0, 100].

#pragma once

#include <vector>

#include "segtcn/autodiff.hpp"
#include "segtcn/pose.hpp"

namespace segtcn {

// Fraction of frames with matching labels. Tracks must be equally long and
// nonempty.
double framewise_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// Segmental edit score: 100 * (1 - lev(P, G) / max(|P|, |G|)) over the two
// segment label strings, unit costs.
double edit_score(const std::vector<int>& pred, const std::vector<int>& truth);

// Segmental F1@k. Predicted segments are matched greedily in temporal order
// against unmatched ground-truth segments of the same class; a match needs
// frame IoU strictly above `overlap`. Ties on IoU go to the earlier
// ground-truth segment. Returns 0 when there are no segments on either side
// after matching (P + R == 0).
double f1_at_overlap(const std::vector<int>& pred, const std::vector<int>& truth,
                     double overlap);

// Mean average precision over classes present in the ground truth. For each
// class, frames are ranked by predicted score descending (ties keep frame
// order), and AP averages the precision at each positive hit.
double framewise_map(const Tensor<float>& probs, const std::vector<int>& truth);
double framewise_map(const std::vector<std::vector<float>>& class_scores,
                     const std::vector<int>& truth);

} // namespace segtcn
