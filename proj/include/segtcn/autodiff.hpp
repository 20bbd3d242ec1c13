// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode engine: eager forward over channels x time tensors,
// with backward closures recorded on a tape and replayed in exact reverse
// order. Gradients accumulate, so a value feeding several consumers needs
// no special casing. Templated on the scalar type: float for training,
// double for gradient checking.

#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "segtcn/error.hpp"
#include "segtcn/kernels.hpp"
#include "segtcn/rng.hpp"

namespace segtcn {

template <typename T>
struct Tensor {
    int channels = 0;
    int time = 0;
    std::vector<T> values;
    std::vector<T> grad;

    std::size_t size() const { return values.size(); }
    T value(int c, int t) const { return values[static_cast<std::size_t>(c) * time + t]; }
};

// Named N-D parameter with flat storage; lives in a ParamStore owned by the
// model, independent of any tape.
template <typename T>
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<T> values;
    std::vector<T> grad;

    std::size_t size() const { return values.size(); }
};

template <typename T>
class ParamStore {
public:
    Param<T>* create(const std::string& name, std::vector<int> shape) {
        if (index_.count(name) != 0)
            throw ValidationError("duplicate parameter name: " + name);
        std::size_t n = 1;
        for (int d : shape) {
            if (d < 1) throw ValidationError("parameter " + name + " has a non-positive dim");
            n *= static_cast<std::size_t>(d);
        }
        params_.push_back(Param<T>{name, std::move(shape), std::vector<T>(n, T(0)),
                                   std::vector<T>(n, T(0))});
        Param<T>* p = &params_.back();
        order_.push_back(p);
        index_.emplace(p->name, p);
        return p;
    }

    Param<T>* find(const std::string& name) {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : it->second;
    }
    const Param<T>* find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : it->second;
    }

    const std::vector<Param<T>*>& all() const { return order_; }

    void zero_grad() {
        for (Param<T>* p : order_) std::fill(p->grad.begin(), p->grad.end(), T(0));
    }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const Param<T>* p : order_) n += p->size();
        return n;
    }

private:
    std::deque<Param<T>> params_; // deque keeps addresses stable
    std::vector<Param<T>*> order_;
    std::unordered_map<std::string, Param<T>*> index_;
};

template <typename T>
class Tape {
public:
    Tensor<T>* tensor(int channels, int time) {
        if (channels < 1 || time < 1)
            throw ValidationError("tensor dims must be positive");
        nodes_.emplace_back();
        Tensor<T>& n = nodes_.back();
        n.channels = channels;
        n.time = time;
        n.values.assign(static_cast<std::size_t>(channels) * time, T(0));
        n.grad.assign(n.values.size(), T(0));
        return &n;
    }

    // Leaf node with copied contents (channel-major).
    Tensor<T>* input(int channels, int time, const T* data) {
        Tensor<T>* n = tensor(channels, time);
        std::copy(data, data + n->size(), n->values.begin());
        return n;
    }

    // Records a backward step; steps run in exact reverse order of recording.
    void record(std::function<void()> backward_step) {
        ops_.push_back(std::move(backward_step));
    }

    void backward() {
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
        ops_.clear();
    }

    Tensor<T>* dilated_conv1d(Tensor<T>* x, Param<T>* w, Param<T>* b, int dilation) {
        if (w->shape.size() != 3)
            throw ValidationError("conv weight must be out x in x kernel: " + w->name);
        const int out_ch = w->shape[0];
        const int in_ch = w->shape[1];
        const int ksize = w->shape[2];
        if (in_ch != x->channels)
            throw ValidationError("conv input channels mismatch for " + w->name);
        if (ksize % 2 == 0) throw ValidationError("conv kernel size must be odd: " + w->name);
        if (b->shape != std::vector<int>{out_ch})
            throw ValidationError("conv bias shape mismatch for " + b->name);
        if (dilation < 1) throw ValidationError("dilation must be >= 1");

        Tensor<T>* y = tensor(out_ch, x->time);
        const int len = x->time;
        kernels::conv1d_forward_t(x->values.data(), in_ch, len, w->values.data(),
                                  b->values.data(), out_ch, ksize, dilation,
                                  y->values.data());
        record([x, w, b, y, in_ch, len, out_ch, ksize, dilation] {
            kernels::conv1d_backward_input_t(y->grad.data(), w->values.data(), in_ch,
                                             len, out_ch, ksize, dilation,
                                             x->grad.data());
            kernels::conv1d_backward_params_t(y->grad.data(), x->values.data(), in_ch,
                                              len, out_ch, ksize, dilation,
                                              w->grad.data(), b->grad.data());
        });
        return y;
    }

    Tensor<T>* pointwise_conv(Tensor<T>* x, Param<T>* w, Param<T>* b) {
        if (w->shape.size() != 2)
            throw ValidationError("pointwise weight must be out x in: " + w->name);
        const int out_ch = w->shape[0];
        const int in_ch = w->shape[1];
        if (in_ch != x->channels)
            throw ValidationError("pointwise input channels mismatch for " + w->name);
        if (b->shape != std::vector<int>{out_ch})
            throw ValidationError("pointwise bias shape mismatch for " + b->name);

        Tensor<T>* y = tensor(out_ch, x->time);
        const int len = x->time;
        kernels::pointwise_forward_t(x->values.data(), in_ch, len, w->values.data(),
                                     b->values.data(), out_ch, y->values.data());
        record([x, w, b, y, in_ch, len, out_ch] {
            kernels::pointwise_backward_input_t(y->grad.data(), w->values.data(), in_ch,
                                                len, out_ch, x->grad.data());
            kernels::pointwise_backward_params_t(y->grad.data(), x->values.data(), in_ch,
                                                 len, out_ch, w->grad.data(),
                                                 b->grad.data());
        });
        return y;
    }

    Tensor<T>* relu(Tensor<T>* x) {
        Tensor<T>* y = tensor(x->channels, x->time);
        kernels::relu_forward_t(x->values.data(), x->size(), y->values.data());
        record([x, y] {
            kernels::relu_backward_t(x->values.data(), y->grad.data(), x->size(),
                                     x->grad.data());
        });
        return y;
    }

    // Normalizes every time column to sum 1 (max-shifted for stability).
    Tensor<T>* softmax_over_channels(Tensor<T>* x) {
        Tensor<T>* y = tensor(x->channels, x->time);
        const int C = x->channels;
        const int M = x->time;
        for (int t = 0; t < M; ++t) {
            T mx = x->values[t];
            for (int c = 1; c < C; ++c)
                mx = std::max(mx, x->values[static_cast<std::size_t>(c) * M + t]);
            T sum = T(0);
            for (int c = 0; c < C; ++c) {
                const T e = std::exp(x->values[static_cast<std::size_t>(c) * M + t] - mx);
                y->values[static_cast<std::size_t>(c) * M + t] = e;
                sum += e;
            }
            for (int c = 0; c < C; ++c)
                y->values[static_cast<std::size_t>(c) * M + t] /= sum;
        }
        record([x, y, C, M] {
            for (int t = 0; t < M; ++t) {
                T dot = T(0);
                for (int c = 0; c < C; ++c) {
                    const std::size_t i = static_cast<std::size_t>(c) * M + t;
                    dot += y->grad[i] * y->values[i];
                }
                for (int c = 0; c < C; ++c) {
                    const std::size_t i = static_cast<std::size_t>(c) * M + t;
                    x->grad[i] += y->values[i] * (y->grad[i] - dot);
                }
            }
        });
        return y;
    }

    Tensor<T>* concat_channels(Tensor<T>* a, Tensor<T>* b) {
        if (a->time != b->time)
            throw ValidationError("concat operands differ in time length");
        Tensor<T>* y = tensor(a->channels + b->channels, a->time);
        std::copy(a->values.begin(), a->values.end(), y->values.begin());
        std::copy(b->values.begin(), b->values.end(), y->values.begin() + a->size());
        record([a, b, y] {
            kernels::accumulate_t(y->grad.data(), a->size(), a->grad.data());
            kernels::accumulate_t(y->grad.data() + a->size(), b->size(), b->grad.data());
        });
        return y;
    }

    Tensor<T>* elementwise_add(Tensor<T>* a, Tensor<T>* b) {
        if (a->channels != b->channels || a->time != b->time)
            throw ValidationError("add operands differ in shape");
        Tensor<T>* y = tensor(a->channels, a->time);
        for (std::size_t i = 0; i < y->size(); ++i)
            y->values[i] = a->values[i] + b->values[i];
        record([a, b, y] {
            kernels::accumulate_t(y->grad.data(), a->size(), a->grad.data());
            kernels::accumulate_t(y->grad.data(), b->size(), b->grad.data());
        });
        return y;
    }

    // Inverted dropout: zero with probability rate, scale survivors by
    // 1/(1-rate). Pass-through when not training or rate is 0.
    Tensor<T>* dropout(Tensor<T>* x, double rate, Rng& rng, bool training) {
        if (!(rate >= 0.0 && rate < 1.0))
            throw ValidationError("dropout rate must be in [0,1)");
        if (!training || rate == 0.0) return x;
        const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
        std::vector<T> mask(x->size());
        for (std::size_t i = 0; i < mask.size(); ++i)
            mask[i] = rng.uniform01() < rate ? T(0) : keep_scale;
        Tensor<T>* y = tensor(x->channels, x->time);
        for (std::size_t i = 0; i < y->size(); ++i)
            y->values[i] = x->values[i] * mask[i];
        record([x, y, m = std::move(mask)] {
            for (std::size_t i = 0; i < m.size(); ++i) x->grad[i] += y->grad[i] * m[i];
        });
        return y;
    }

    Tensor<T>* scale(Tensor<T>* x, T factor) {
        Tensor<T>* y = tensor(x->channels, x->time);
        for (std::size_t i = 0; i < y->size(); ++i) y->values[i] = x->values[i] * factor;
        record([x, y, factor] {
            for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += y->grad[i] * factor;
        });
        return y;
    }

private:
    std::deque<Tensor<T>> nodes_;
    std::vector<std::function<void()>> ops_;
};

} // namespace segtcn
