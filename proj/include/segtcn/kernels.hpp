// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Inner-loop array kernels behind the network and the rasterizer. Every
// kernel exists as a scalar reference (namespace ref, templated) and may
// have an AVX2 variant; the float entry points below dispatch at runtime.
// Scalar and SIMD variants perform the identical per-element operation
// sequence, so their outputs are required (and tested) to be bit-equal.
// The build disables fp contraction to keep that guarantee.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace segtcn::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);

// Active instruction set: SEGTCN_ISA=scalar|avx2 overrides, otherwise the
// best supported one is picked at first use.
Isa active_isa();
void force_isa(Isa isa); // throws ValidationError if unsupported
void clear_forced_isa();

// ---------------------------------------------------------------------------
// Dispatched float entry points.
//
// Layout conventions: a feature map is row-major [channels][len]; conv
// weights are [out_ch][in_ch][ksize] with ksize odd and taps centred, so
// tap k reads offset (k - (ksize-1)/2) * dilation and "same" padding is
// implicit (out-of-range taps contribute nothing). Backward kernels
// accumulate (+=) into their gradient outputs.
// ---------------------------------------------------------------------------

void conv1d_forward(const float* x, int in_ch, int len, const float* w,
                    const float* b, int out_ch, int ksize, int dilation, float* y);
void conv1d_backward_input(const float* dy, const float* w, int in_ch, int len,
                           int out_ch, int ksize, int dilation, float* dx);
void conv1d_backward_params(const float* dy, const float* x, int in_ch, int len,
                            int out_ch, int ksize, int dilation, float* dw, float* db);

void pointwise_forward(const float* x, int in_ch, int len, const float* w,
                       const float* b, int out_ch, float* y);
void pointwise_backward_input(const float* dy, const float* w, int in_ch, int len,
                              int out_ch, float* dx);
void pointwise_backward_params(const float* dy, const float* x, int in_ch, int len,
                               int out_ch, float* dw, float* db);

void relu_forward(const float* x, std::size_t n, float* y);
void relu_backward(const float* x, const float* dy, std::size_t n, float* dx);

// y += x
void accumulate(const float* x, std::size_t n, float* y);

// y[i] = exp(-d[i] * rate) * scale, d[i] >= 0
void exp_decay(const float* d, std::size_t n, float rate, float scale, float* y);

// In-place Adam update; bc1/bc2 are the precomputed bias corrections
// 1/(1-beta1^t) and 1/(1-beta2^t).
void adam_update(float* p, const float* g, float* m, float* v, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float bc1, float bc2);

// ---------------------------------------------------------------------------
// Scalar reference implementations. These define the semantics; the AVX2
// backend replays the same operation order lane-wise. Reductions use eight
// strided partial sums merged left to right so both backends round alike.
// ---------------------------------------------------------------------------

namespace ref {

template <typename T>
T strided_dot(const T* a, const T* b, int n) {
    if (n <= 0) return T(0); // dilation can exceed the sequence length
    T lane[8] = {};
    const int n8 = n & ~7;
    for (int t = 0; t < n8; t += 8)
        for (int j = 0; j < 8; ++j) lane[j] += a[t + j] * b[t + j];
    T total = 0;
    for (int j = 0; j < 8; ++j) total += lane[j];
    for (int t = n8; t < n; ++t) total += a[t] * b[t];
    return total;
}

template <typename T>
T strided_sum(const T* a, int n) {
    T lane[8] = {};
    const int n8 = n & ~7;
    for (int t = 0; t < n8; t += 8)
        for (int j = 0; j < 8; ++j) lane[j] += a[t + j];
    T total = 0;
    for (int j = 0; j < 8; ++j) total += lane[j];
    for (int t = n8; t < n; ++t) total += a[t];
    return total;
}

template <typename T>
void conv1d_forward(const T* x, int in_ch, int len, const T* w, const T* b,
                    int out_ch, int ksize, int dilation, T* y) {
    const int centre = (ksize - 1) / 2;
    for (int o = 0; o < out_ch; ++o) {
        T* yo = y + static_cast<std::size_t>(o) * len;
        for (int t = 0; t < len; ++t) yo[t] = b[o];
        for (int i = 0; i < in_ch; ++i) {
            const T* xi = x + static_cast<std::size_t>(i) * len;
            const T* wi = w + (static_cast<std::size_t>(o) * in_ch + i) * ksize;
            for (int k = 0; k < ksize; ++k) {
                const int off = (k - centre) * dilation;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(len, len - off);
                const T wv = wi[k];
                for (int t = t0; t < t1; ++t) yo[t] += wv * xi[t + off];
            }
        }
    }
}

template <typename T>
void conv1d_backward_input(const T* dy, const T* w, int in_ch, int len,
                           int out_ch, int ksize, int dilation, T* dx) {
    const int centre = (ksize - 1) / 2;
    for (int i = 0; i < in_ch; ++i) {
        T* dxi = dx + static_cast<std::size_t>(i) * len;
        for (int o = 0; o < out_ch; ++o) {
            const T* dyo = dy + static_cast<std::size_t>(o) * len;
            const T* wi = w + (static_cast<std::size_t>(o) * in_ch + i) * ksize;
            for (int k = 0; k < ksize; ++k) {
                const int off = (k - centre) * dilation; // dx[t] += w * dy[t - off]
                const int t0 = std::max(0, off);
                const int t1 = std::min(len, len + off);
                const T wv = wi[k];
                for (int t = t0; t < t1; ++t) dxi[t] += wv * dyo[t - off];
            }
        }
    }
}

template <typename T>
void conv1d_backward_params(const T* dy, const T* x, int in_ch, int len,
                            int out_ch, int ksize, int dilation, T* dw, T* db) {
    const int centre = (ksize - 1) / 2;
    for (int o = 0; o < out_ch; ++o) {
        const T* dyo = dy + static_cast<std::size_t>(o) * len;
        for (int i = 0; i < in_ch; ++i) {
            const T* xi = x + static_cast<std::size_t>(i) * len;
            for (int k = 0; k < ksize; ++k) {
                const int off = (k - centre) * dilation;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(len, len - off);
                dw[(static_cast<std::size_t>(o) * in_ch + i) * ksize + k] +=
                    strided_dot(dyo + t0, xi + t0 + off, t1 - t0);
            }
        }
        db[o] += strided_sum(dyo, len);
    }
}

template <typename T>
void pointwise_forward(const T* x, int in_ch, int len, const T* w, const T* b,
                       int out_ch, T* y) {
    for (int o = 0; o < out_ch; ++o) {
        T* yo = y + static_cast<std::size_t>(o) * len;
        for (int t = 0; t < len; ++t) yo[t] = b[o];
        for (int i = 0; i < in_ch; ++i) {
            const T wv = w[static_cast<std::size_t>(o) * in_ch + i];
            const T* xi = x + static_cast<std::size_t>(i) * len;
            for (int t = 0; t < len; ++t) yo[t] += wv * xi[t];
        }
    }
}

template <typename T>
void pointwise_backward_input(const T* dy, const T* w, int in_ch, int len,
                              int out_ch, T* dx) {
    for (int i = 0; i < in_ch; ++i) {
        T* dxi = dx + static_cast<std::size_t>(i) * len;
        for (int o = 0; o < out_ch; ++o) {
            const T wv = w[static_cast<std::size_t>(o) * in_ch + i];
            const T* dyo = dy + static_cast<std::size_t>(o) * len;
            for (int t = 0; t < len; ++t) dxi[t] += wv * dyo[t];
        }
    }
}

template <typename T>
void pointwise_backward_params(const T* dy, const T* x, int in_ch, int len,
                               int out_ch, T* dw, T* db) {
    for (int o = 0; o < out_ch; ++o) {
        const T* dyo = dy + static_cast<std::size_t>(o) * len;
        for (int i = 0; i < in_ch; ++i)
            dw[static_cast<std::size_t>(o) * in_ch + i] +=
                strided_dot(dyo, x + static_cast<std::size_t>(i) * len, len);
        db[o] += strided_sum(dyo, len);
    }
}

template <typename T>
void relu_forward(const T* x, std::size_t n, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, std::size_t n, T* dx) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void accumulate(const T* x, std::size_t n, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

// exp(x) for x <= 0: cephes-style range reduction plus degree-5 polynomial,
// ~2 ulp. exp_neg(0) is exactly 1. Shared verbatim (operation for
// operation) with the AVX2 variant.
inline float exp_neg(float x) {
    x = x > -87.0f ? x : -87.0f;
    const float z = x * 1.44269504088896341f + 0.5f;
    const float nf = std::floor(z);
    float r = x - nf * 0.693359375f;
    r = r - nf * -2.12194440e-4f;
    float p = 1.9875691500e-4f;
    p = p * r + 1.3981999507e-3f;
    p = p * r + 8.3334519073e-3f;
    p = p * r + 4.1665795894e-2f;
    p = p * r + 1.6666665459e-1f;
    p = p * r + 5.0000001201e-1f;
    p = p * r;
    p = p * r;
    p = p + r;
    p = p + 1.0f;
    const std::int32_t n = static_cast<std::int32_t>(nf);
    return p * std::bit_cast<float>((n + 127) << 23);
}

template <typename T>
void exp_decay(const T* d, std::size_t n, T rate, T scale, T* y) {
    if constexpr (std::is_same_v<T, float>) {
        for (std::size_t i = 0; i < n; ++i) y[i] = exp_neg(-(d[i] * rate)) * scale;
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(-(d[i] * rate)) * scale;
    }
}

template <typename T>
void adam_update(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                 T beta2, T eps, T bc1, T bc2) {
    const T omb1 = T(1) - beta1;
    const T omb2 = T(1) - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + omb1 * g[i];
        v[i] = beta2 * v[i] + omb2 * (g[i] * g[i]);
        const T mhat = m[i] * bc1;
        const T vhat = v[i] * bc2;
        p[i] = p[i] - (lr * mhat) / (std::sqrt(vhat) + eps);
    }
}

} // namespace ref

// ---------------------------------------------------------------------------
// Generic entry points: float goes through the dispatcher, any other scalar
// type runs the reference path (the 64-bit mode is only used for gradient
// checking and small oracles).
// ---------------------------------------------------------------------------

template <typename T>
void conv1d_forward_t(const T* x, int in_ch, int len, const T* w, const T* b,
                      int out_ch, int ksize, int dilation, T* y) {
    if constexpr (std::is_same_v<T, float>)
        conv1d_forward(x, in_ch, len, w, b, out_ch, ksize, dilation, y);
    else
        ref::conv1d_forward(x, in_ch, len, w, b, out_ch, ksize, dilation, y);
}

template <typename T>
void conv1d_backward_input_t(const T* dy, const T* w, int in_ch, int len,
                             int out_ch, int ksize, int dilation, T* dx) {
    if constexpr (std::is_same_v<T, float>)
        conv1d_backward_input(dy, w, in_ch, len, out_ch, ksize, dilation, dx);
    else
        ref::conv1d_backward_input(dy, w, in_ch, len, out_ch, ksize, dilation, dx);
}

template <typename T>
void conv1d_backward_params_t(const T* dy, const T* x, int in_ch, int len,
                              int out_ch, int ksize, int dilation, T* dw, T* db) {
    if constexpr (std::is_same_v<T, float>)
        conv1d_backward_params(dy, x, in_ch, len, out_ch, ksize, dilation, dw, db);
    else
        ref::conv1d_backward_params(dy, x, in_ch, len, out_ch, ksize, dilation, dw, db);
}

template <typename T>
void pointwise_forward_t(const T* x, int in_ch, int len, const T* w, const T* b,
                         int out_ch, T* y) {
    if constexpr (std::is_same_v<T, float>)
        pointwise_forward(x, in_ch, len, w, b, out_ch, y);
    else
        ref::pointwise_forward(x, in_ch, len, w, b, out_ch, y);
}

template <typename T>
void pointwise_backward_input_t(const T* dy, const T* w, int in_ch, int len,
                                int out_ch, T* dx) {
    if constexpr (std::is_same_v<T, float>)
        pointwise_backward_input(dy, w, in_ch, len, out_ch, dx);
    else
        ref::pointwise_backward_input(dy, w, in_ch, len, out_ch, dx);
}

template <typename T>
void pointwise_backward_params_t(const T* dy, const T* x, int in_ch, int len,
                                 int out_ch, T* dw, T* db) {
    if constexpr (std::is_same_v<T, float>)
        pointwise_backward_params(dy, x, in_ch, len, out_ch, dw, db);
    else
        ref::pointwise_backward_params(dy, x, in_ch, len, out_ch, dw, db);
}

template <typename T>
void relu_forward_t(const T* x, std::size_t n, T* y) {
    if constexpr (std::is_same_v<T, float>)
        relu_forward(x, n, y);
    else
        ref::relu_forward(x, n, y);
}

template <typename T>
void relu_backward_t(const T* x, const T* dy, std::size_t n, T* dx) {
    if constexpr (std::is_same_v<T, float>)
        relu_backward(x, dy, n, dx);
    else
        ref::relu_backward(x, dy, n, dx);
}

template <typename T>
void accumulate_t(const T* x, std::size_t n, T* y) {
    if constexpr (std::is_same_v<T, float>)
        accumulate(x, n, y);
    else
        ref::accumulate(x, n, y);
}

template <typename T>
void adam_update_t(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                   T beta2, T eps, T bc1, T bc2) {
    if constexpr (std::is_same_v<T, float>)
        adam_update(p, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
    else
        ref::adam_update(p, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}

} // namespace segtcn::kernels
