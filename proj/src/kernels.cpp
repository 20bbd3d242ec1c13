// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#include "segtcn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "segtcn/error.hpp"
#include "kernels_internal.hpp"

namespace segtcn::kernels {

namespace detail {

namespace {

const Backend kScalarBackend = {
    &ref::conv1d_forward<float>,
    &ref::conv1d_backward_input<float>,
    &ref::conv1d_backward_params<float>,
    &ref::pointwise_forward<float>,
    &ref::pointwise_backward_input<float>,
    &ref::pointwise_backward_params<float>,
    &ref::relu_forward<float>,
    &ref::relu_backward<float>,
    &ref::accumulate<float>,
    &ref::exp_decay<float>,
    &ref::adam_update<float>,
};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Backend* backend_for(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
    if (isa == Isa::avx2) return &kAvx2Backend;
#endif
    (void)isa;
    return &kScalarBackend;
}

Isa default_isa() {
    if (const char* env = std::getenv("SEGTCN_ISA")) {
        const std::string value(env);
        if (value == "scalar") return Isa::scalar;
        if (value == "avx2") {
            if (!cpu_has_avx2())
                throw ValidationError("SEGTCN_ISA=avx2 but the cpu lacks avx2");
            return Isa::avx2;
        }
        throw ValidationError("unknown SEGTCN_ISA value: " + value);
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& isa_slot() {
    static std::atomic<int> slot{static_cast<int>(default_isa())};
    return slot;
}

const Backend& backend() {
    return *backend_for(static_cast<Isa>(isa_slot().load(std::memory_order_relaxed)));
}

} // namespace

} // namespace detail

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    return isa == Isa::scalar || detail::cpu_has_avx2();
}

Isa active_isa() {
    return static_cast<Isa>(detail::isa_slot().load(std::memory_order_relaxed));
}

void force_isa(Isa isa) {
    if (!isa_supported(isa))
        throw ValidationError(std::string("isa not supported on this cpu: ") + isa_name(isa));
    detail::isa_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

void clear_forced_isa() {
    detail::isa_slot().store(static_cast<int>(detail::default_isa()),
                             std::memory_order_relaxed);
}

void conv1d_forward(const float* x, int in_ch, int len, const float* w,
                    const float* b, int out_ch, int ksize, int dilation, float* y) {
    detail::backend().conv1d_forward(x, in_ch, len, w, b, out_ch, ksize, dilation, y);
}

void conv1d_backward_input(const float* dy, const float* w, int in_ch, int len,
                           int out_ch, int ksize, int dilation, float* dx) {
    detail::backend().conv1d_backward_input(dy, w, in_ch, len, out_ch, ksize, dilation, dx);
}

void conv1d_backward_params(const float* dy, const float* x, int in_ch, int len,
                            int out_ch, int ksize, int dilation, float* dw, float* db) {
    detail::backend().conv1d_backward_params(dy, x, in_ch, len, out_ch, ksize, dilation, dw, db);
}

void pointwise_forward(const float* x, int in_ch, int len, const float* w,
                       const float* b, int out_ch, float* y) {
    detail::backend().pointwise_forward(x, in_ch, len, w, b, out_ch, y);
}

void pointwise_backward_input(const float* dy, const float* w, int in_ch, int len,
                              int out_ch, float* dx) {
    detail::backend().pointwise_backward_input(dy, w, in_ch, len, out_ch, dx);
}

void pointwise_backward_params(const float* dy, const float* x, int in_ch, int len,
                               int out_ch, float* dw, float* db) {
    detail::backend().pointwise_backward_params(dy, x, in_ch, len, out_ch, dw, db);
}

void relu_forward(const float* x, std::size_t n, float* y) {
    detail::backend().relu_forward(x, n, y);
}

void relu_backward(const float* x, const float* dy, std::size_t n, float* dx) {
    detail::backend().relu_backward(x, dy, n, dx);
}

void accumulate(const float* x, std::size_t n, float* y) {
    detail::backend().accumulate(x, n, y);
}

void exp_decay(const float* d, std::size_t n, float rate, float scale, float* y) {
    detail::backend().exp_decay(d, n, rate, scale, y);
}

void adam_update(float* p, const float* g, float* m, float* v, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float bc1, float bc2) {
    detail::backend().adam_update(p, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}

} // namespace segtcn::kernels
