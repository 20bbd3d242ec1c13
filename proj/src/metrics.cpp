// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "segtcn/error.hpp"

namespace segtcn {

namespace {

void check_tracks(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.empty() || truth.empty()) throw ValidationError("metric tracks must be nonempty");
    if (pred.size() != truth.size())
        throw ValidationError("prediction and ground truth differ in length");
}

int levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> row(m + 1);
    std::iota(row.begin(), row.end(), 0);
    for (std::size_t i = 1; i <= n; ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return row[m];
}

double segment_iou(const Segment& a, const Segment& b) {
    const int inter = std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
    if (inter <= 0) return 0.0;
    const int uni = std::max(a.end, b.end) - std::min(a.start, b.start) + 1;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

double framewise_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    check_tracks(pred, truth);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

double edit_score(const std::vector<int>& pred, const std::vector<int>& truth) {
    check_tracks(pred, truth);
    std::vector<int> p, g;
    for (const Segment& s : segments_of(pred)) p.push_back(s.cls);
    for (const Segment& s : segments_of(truth)) g.push_back(s.cls);
    const double denom = static_cast<double>(std::max(p.size(), g.size()));
    return 100.0 * (1.0 - static_cast<double>(levenshtein(p, g)) / denom);
}

double f1_at_overlap(const std::vector<int>& pred, const std::vector<int>& truth,
                     double overlap) {
    check_tracks(pred, truth);
    if (overlap <= 0.0 || overlap > 1.0)
        throw ValidationError("overlap threshold must lie in (0, 1]");
    const std::vector<Segment> ps = segments_of(pred);
    const std::vector<Segment> gs = segments_of(truth);
    std::vector<char> used(gs.size(), 0);
    int tp = 0;
    for (const Segment& p : ps) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t j = 0; j < gs.size(); ++j) {
            if (used[j] || gs[j].cls != p.cls) continue;
            const double iou = segment_iou(p, gs[j]);
            // Strict > keeps the earliest ground-truth segment on ties.
            if (iou > best_iou) {
                best_iou = iou;
                best = static_cast<int>(j);
            }
        }
        if (best >= 0 && best_iou > overlap) {
            used[best] = 1;
            ++tp;
        }
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(ps.size());
    const double recall = static_cast<double>(tp) / static_cast<double>(gs.size());
    if (precision + recall == 0.0) return 0.0;
    return 100.0 * 2.0 * precision * recall / (precision + recall);
}

double framewise_map(const std::vector<std::vector<float>>& class_scores,
                     const std::vector<int>& truth) {
    if (truth.empty()) throw ValidationError("metric tracks must be nonempty");
    if (class_scores.empty()) throw ValidationError("no class scores given");
    const std::size_t frames = truth.size();
    for (const auto& row : class_scores)
        if (row.size() != frames)
            throw ValidationError("score track and ground truth differ in length");
    const int classes = static_cast<int>(class_scores.size());
    for (int label : truth)
        if (label < 0 || label >= classes)
            throw ValidationError("ground-truth label outside the scored class range");

    double ap_sum = 0.0;
    int present = 0;
    for (int c = 0; c < classes; ++c) {
        std::size_t positives = 0;
        for (int label : truth)
            if (label == c) ++positives;
        if (positives == 0) continue;
        ++present;
        std::vector<int> order(frames);
        std::iota(order.begin(), order.end(), 0);
        const std::vector<float>& scores = class_scores[c];
        std::stable_sort(order.begin(), order.end(),
                         [&scores](int a, int b) { return scores[a] > scores[b]; });
        double precision_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t rank = 0; rank < frames; ++rank) {
            if (truth[order[rank]] != c) continue;
            ++hits;
            precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
        ap_sum += precision_sum / static_cast<double>(positives);
    }
    return 100.0 * ap_sum / static_cast<double>(present);
}

double framewise_map(const Tensor<float>& probs, const std::vector<int>& truth) {
    std::vector<std::vector<float>> rows(probs.channels);
    for (int c = 0; c < probs.channels; ++c) {
        rows[c].resize(probs.time);
        for (int t = 0; t < probs.time; ++t) rows[c][t] = probs.value(c, t);
    }
    return framewise_map(rows, truth);
}

} // namespace segtcn
