// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "segtcn/autodiff.hpp"
#include "segtcn/rng.hpp"

namespace segtcn {

struct GradCheckOptions {
    int coords_per_param = 32; // sampled coordinates per parameter (all when smaller)
    double step = 1e-5;
    std::uint64_t seed = 1;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_coord = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Central finite differences against the recorded backward pass, at 64-bit.
// loss_fn(true) must build a fresh graph over the given parameters, run
// backward so gradients accumulate on them, and return the loss value;
// loss_fn(false) evaluates the loss only. Relative error uses the
// denominator max(|analytic|, |numeric|, 1e-8).
inline GradCheckReport grad_check(const std::vector<Param<double>*>& params,
                                  const std::function<double(bool)>& loss_fn,
                                  const GradCheckOptions& opts = {}) {
    for (Param<double>* p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);
    loss_fn(true);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const Param<double>* p : params) analytic.push_back(p->grad);

    Rng rng(opts.seed);
    GradCheckReport report;
    const double h = opts.step;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Param<double>* p = params[pi];
        const std::size_t n = p->size();
        std::vector<std::size_t> coords;
        if (n <= static_cast<std::size_t>(opts.coords_per_param)) {
            coords.resize(n);
            for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        } else {
            while (coords.size() < static_cast<std::size_t>(opts.coords_per_param)) {
                const std::size_t c = rng.below(n);
                if (std::find(coords.begin(), coords.end(), c) == coords.end())
                    coords.push_back(c);
            }
        }
        for (std::size_t c : coords) {
            const double orig = p->values[c];
            p->values[c] = orig + h;
            const double up = loss_fn(false);
            p->values[c] = orig - h;
            const double down = loss_fn(false);
            p->values[c] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[pi][c];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.worst_param = p->name;
                report.worst_coord = c;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

} // namespace segtcn
