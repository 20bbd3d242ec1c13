// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stage losses over probability tracks: framewise cross-entropy plus the
// truncated mean squared difference of adjacent log-probabilities. Both seed
// gradients directly into the probability tensor; propagate with
// Tape::backward afterwards.

#pragma once

#include <cmath>
#include <vector>

#include "segtcn/autodiff.hpp"
#include "segtcn/error.hpp"

namespace segtcn {

struct LossConfig {
    double tau = 16.0;
    double alpha = 0.15;
    double log_floor = 1e-12;
};

// (1/M) sum_i -log max(y[c_i, i], log_floor). Accumulates d(loss)/d(probs)
// scaled by grad_weight.
template <typename T>
T classification_loss(Tensor<T>* probs, const std::vector<int>& truth,
                      const LossConfig& cfg, T grad_weight = T(1)) {
    const int M = probs->time;
    const int C = probs->channels;
    if (static_cast<int>(truth.size()) != M)
        throw ValidationError("label track length does not match probabilities");
    const T floor = static_cast<T>(cfg.log_floor);
    T loss = T(0);
    const T inv_m = T(1) / static_cast<T>(M);
    for (int i = 0; i < M; ++i) {
        const int c = truth[i];
        if (c < 0 || c >= C) throw ValidationError("label id out of range");
        const T y = probs->values[static_cast<std::size_t>(c) * M + i];
        const T clipped = y > floor ? y : floor;
        loss += -std::log(clipped);
        if (y > floor)
            probs->grad[static_cast<std::size_t>(c) * M + i] += grad_weight * (-inv_m / y);
    }
    return loss * inv_m;
}

// (1/(M*C)) sum over i in [1,M), c of min(|log y_i - log y_{i-1}|, tau)^2.
// Entries past tau contribute tau^2 with zero gradient. Returns the
// unweighted loss; gradients are seeded scaled by grad_weight.
template <typename T>
T smoothness_loss(Tensor<T>* probs, const LossConfig& cfg, T grad_weight = T(1)) {
    const int M = probs->time;
    const int C = probs->channels;
    const T tau = static_cast<T>(cfg.tau);
    const T floor = static_cast<T>(cfg.log_floor);
    const T norm = T(1) / (static_cast<T>(M) * static_cast<T>(C));
    T loss = T(0);
    for (int c = 0; c < C; ++c) {
        const std::size_t row = static_cast<std::size_t>(c) * M;
        for (int i = 1; i < M; ++i) {
            const T y1 = probs->values[row + i];
            const T y0 = probs->values[row + i - 1];
            const T lg1 = std::log(y1 > floor ? y1 : floor);
            const T lg0 = std::log(y0 > floor ? y0 : floor);
            const T diff = lg1 - lg0;
            const T delta = std::abs(diff);
            if (delta > tau) {
                loss += tau * tau;
                continue; // truncated: constant contribution, zero gradient
            }
            loss += delta * delta;
            const T d_diff = grad_weight * norm * T(2) * diff; // 2*delta*sign(diff)
            if (y1 > floor) probs->grad[row + i] += d_diff / y1;
            if (y0 > floor) probs->grad[row + i - 1] -= d_diff / y0;
        }
    }
    return loss * norm;
}

template <typename T>
struct StageLosses {
    T classification = T(0);
    T smoothness = T(0);
};

template <typename T>
struct TotalLoss {
    T total = T(0);
    std::vector<StageLosses<T>> stages;
};

// Deep supervision: sum of classification + alpha * smoothness over every
// stage's probability track.
template <typename T>
TotalLoss<T> total_loss(const std::vector<Tensor<T>*>& stage_probs,
                        const std::vector<int>& truth, const LossConfig& cfg) {
    if (stage_probs.empty()) throw ValidationError("total_loss needs at least one stage");
    const T alpha = static_cast<T>(cfg.alpha);
    TotalLoss<T> out;
    for (Tensor<T>* probs : stage_probs) {
        StageLosses<T> sl;
        sl.classification = classification_loss(probs, truth, cfg);
        sl.smoothness = smoothness_loss(probs, cfg, alpha);
        out.total += sl.classification + alpha * sl.smoothness;
        out.stages.push_back(sl);
    }
    return out;
}

} // namespace segtcn
