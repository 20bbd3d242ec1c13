// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "segtcn/autodiff.hpp"
#include "segtcn/error.hpp"
#include "segtcn/kernels.hpp"

namespace segtcn {

// Bias-corrected Adam over a fixed parameter list; one step consumes the
// gradients currently accumulated on the parameters.
template <typename T>
class Adam {
public:
    explicit Adam(std::vector<Param<T>*> params, T lr, T beta1 = T(0.9),
                  T beta2 = T(0.999), T eps = T(1e-8))
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const Param<T>* p : params_) {
            m_.emplace_back(p->size(), T(0));
            v_.emplace_back(p->size(), T(0));
        }
    }

    void step() {
        ++step_count_;
        const double t = static_cast<double>(step_count_);
        const T bc1 = static_cast<T>(1.0 / (1.0 - std::pow(static_cast<double>(beta1_), t)));
        const T bc2 = static_cast<T>(1.0 / (1.0 - std::pow(static_cast<double>(beta2_), t)));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Param<T>* p = params_[i];
            for (std::size_t j = 0; j < p->grad.size(); ++j)
                if (!std::isfinite(p->grad[j]))
                    throw RuntimeError("non-finite gradient in parameter " + p->name);
            kernels::adam_update_t(p->values.data(), p->grad.data(), m_[i].data(),
                                   v_[i].data(), p->size(), lr_, beta1_, beta2_, eps_,
                                   bc1, bc2);
        }
    }

    void zero_grad() {
        for (Param<T>* p : params_) std::fill(p->grad.begin(), p->grad.end(), T(0));
    }

    long step_count() const { return step_count_; }
    T learning_rate() const { return lr_; }

private:
    std::vector<Param<T>*> params_;
    std::vector<std::vector<T>> m_, v_;
    T lr_, beta1_, beta2_, eps_;
    long step_count_ = 0;
};

} // namespace segtcn
