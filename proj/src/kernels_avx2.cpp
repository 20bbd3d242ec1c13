// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernel variants. Each one replays the reference operation order
// lane-wise: multiplies and adds stay separate (no fma, matching the
// contraction-free scalar build), reductions keep eight strided partial
// sums merged by the same left-to-right horizontal pass, and boundary
// columns fall back to the identical scalar expression. Outputs are
// bit-equal to namespace ref by construction.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

#include "segtcn/kernels.hpp"
#include "kernels_internal.hpp"

namespace segtcn::kernels::detail {
namespace {

// y[t0..t1) += wv * x[t0..t1)
void axpy_range(float* y, const float* x, float wv, int t0, int t1) {
    const __m256 wvv = _mm256_set1_ps(wv);
    int t = t0;
    for (; t + 8 <= t1; t += 8) {
        const __m256 acc = _mm256_add_ps(_mm256_loadu_ps(y + t),
                                         _mm256_mul_ps(wvv, _mm256_loadu_ps(x + t)));
        _mm256_storeu_ps(y + t, acc);
    }
    for (; t < t1; ++t) y[t] += wv * x[t];
}

float strided_dot(const float* a, const float* b, int n) {
    if (n <= 0) return 0.0f; // dilation can exceed the sequence length
    __m256 acc = _mm256_setzero_ps();
    const int n8 = n & ~7;
    for (int t = 0; t < n8; t += 8)
        acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(a + t),
                                               _mm256_loadu_ps(b + t)));
    alignas(32) float lane[8];
    _mm256_store_ps(lane, acc);
    float total = 0.0f;
    for (int j = 0; j < 8; ++j) total += lane[j];
    for (int t = n8; t < n; ++t) total += a[t] * b[t];
    return total;
}

float strided_sum(const float* a, int n) {
    __m256 acc = _mm256_setzero_ps();
    const int n8 = n & ~7;
    for (int t = 0; t < n8; t += 8)
        acc = _mm256_add_ps(acc, _mm256_loadu_ps(a + t));
    alignas(32) float lane[8];
    _mm256_store_ps(lane, acc);
    float total = 0.0f;
    for (int j = 0; j < 8; ++j) total += lane[j];
    for (int t = n8; t < n; ++t) total += a[t];
    return total;
}

void fill_row(float* y, int len, float value) {
    const __m256 v = _mm256_set1_ps(value);
    int t = 0;
    for (; t + 8 <= len; t += 8) _mm256_storeu_ps(y + t, v);
    for (; t < len; ++t) y[t] = value;
}

void conv1d_forward(const float* x, int in_ch, int len, const float* w,
                    const float* b, int out_ch, int ksize, int dilation, float* y) {
    const int centre = (ksize - 1) / 2;
    for (int o = 0; o < out_ch; ++o) {
        float* yo = y + static_cast<std::size_t>(o) * len;
        fill_row(yo, len, b[o]);
        for (int i = 0; i < in_ch; ++i) {
            const float* xi = x + static_cast<std::size_t>(i) * len;
            const float* wi = w + (static_cast<std::size_t>(o) * in_ch + i) * ksize;
            for (int k = 0; k < ksize; ++k) {
                const int off = (k - centre) * dilation;
                const int t0 = off < 0 ? -off : 0;
                const int t1 = off > 0 ? len - off : len;
                axpy_range(yo, xi + off, wi[k], t0, t1);
            }
        }
    }
}

void conv1d_backward_input(const float* dy, const float* w, int in_ch, int len,
                           int out_ch, int ksize, int dilation, float* dx) {
    const int centre = (ksize - 1) / 2;
    for (int i = 0; i < in_ch; ++i) {
        float* dxi = dx + static_cast<std::size_t>(i) * len;
        for (int o = 0; o < out_ch; ++o) {
            const float* dyo = dy + static_cast<std::size_t>(o) * len;
            const float* wi = w + (static_cast<std::size_t>(o) * in_ch + i) * ksize;
            for (int k = 0; k < ksize; ++k) {
                const int off = (k - centre) * dilation;
                const int t0 = off > 0 ? off : 0;
                const int t1 = off < 0 ? len + off : len;
                axpy_range(dxi, dyo - off, wi[k], t0, t1);
            }
        }
    }
}

void conv1d_backward_params(const float* dy, const float* x, int in_ch, int len,
                            int out_ch, int ksize, int dilation, float* dw, float* db) {
    const int centre = (ksize - 1) / 2;
    for (int o = 0; o < out_ch; ++o) {
        const float* dyo = dy + static_cast<std::size_t>(o) * len;
        for (int i = 0; i < in_ch; ++i) {
            const float* xi = x + static_cast<std::size_t>(i) * len;
            for (int k = 0; k < ksize; ++k) {
                const int off = (k - centre) * dilation;
                const int t0 = off < 0 ? -off : 0;
                const int t1 = off > 0 ? len - off : len;
                dw[(static_cast<std::size_t>(o) * in_ch + i) * ksize + k] +=
                    strided_dot(dyo + t0, xi + t0 + off, t1 - t0);
            }
        }
        db[o] += strided_sum(dyo, len);
    }
}

void pointwise_forward(const float* x, int in_ch, int len, const float* w,
                       const float* b, int out_ch, float* y) {
    for (int o = 0; o < out_ch; ++o) {
        float* yo = y + static_cast<std::size_t>(o) * len;
        fill_row(yo, len, b[o]);
        for (int i = 0; i < in_ch; ++i)
            axpy_range(yo, x + static_cast<std::size_t>(i) * len,
                       w[static_cast<std::size_t>(o) * in_ch + i], 0, len);
    }
}

void pointwise_backward_input(const float* dy, const float* w, int in_ch,
                              int len, int out_ch, float* dx) {
    for (int i = 0; i < in_ch; ++i) {
        float* dxi = dx + static_cast<std::size_t>(i) * len;
        for (int o = 0; o < out_ch; ++o)
            axpy_range(dxi, dy + static_cast<std::size_t>(o) * len,
                       w[static_cast<std::size_t>(o) * in_ch + i], 0, len);
    }
}

void pointwise_backward_params(const float* dy, const float* x, int in_ch,
                               int len, int out_ch, float* dw, float* db) {
    for (int o = 0; o < out_ch; ++o) {
        const float* dyo = dy + static_cast<std::size_t>(o) * len;
        for (int i = 0; i < in_ch; ++i)
            dw[static_cast<std::size_t>(o) * in_ch + i] +=
                strided_dot(dyo, x + static_cast<std::size_t>(i) * len, len);
        db[o] += strided_sum(dyo, len);
    }
}

void relu_forward(const float* x, std::size_t n, float* y) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward(const float* x, const float* dy, std::size_t n, float* dx) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
        const __m256 pass = _mm256_and_ps(mask, _mm256_loadu_ps(dy + i));
        _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), pass));
    }
    for (; i < n; ++i) dx[i] += x[i] > 0.0f ? dy[i] : 0.0f;
}

void accumulate(const float* x, std::size_t n, float* y) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i),
                                              _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

// Vector counterpart of ref::exp_neg, same constants and operation order.
__m256 exp_neg8(__m256 x) {
    x = _mm256_max_ps(x, _mm256_set1_ps(-87.0f));
    const __m256 z = _mm256_add_ps(_mm256_mul_ps(x, _mm256_set1_ps(1.44269504088896341f)),
                                   _mm256_set1_ps(0.5f));
    const __m256 nf = _mm256_floor_ps(z);
    __m256 r = _mm256_sub_ps(x, _mm256_mul_ps(nf, _mm256_set1_ps(0.693359375f)));
    r = _mm256_sub_ps(r, _mm256_mul_ps(nf, _mm256_set1_ps(-2.12194440e-4f)));
    __m256 p = _mm256_set1_ps(1.9875691500e-4f);
    p = _mm256_add_ps(_mm256_mul_ps(p, r), _mm256_set1_ps(1.3981999507e-3f));
    p = _mm256_add_ps(_mm256_mul_ps(p, r), _mm256_set1_ps(8.3334519073e-3f));
    p = _mm256_add_ps(_mm256_mul_ps(p, r), _mm256_set1_ps(4.1665795894e-2f));
    p = _mm256_add_ps(_mm256_mul_ps(p, r), _mm256_set1_ps(1.6666665459e-1f));
    p = _mm256_add_ps(_mm256_mul_ps(p, r), _mm256_set1_ps(5.0000001201e-1f));
    p = _mm256_mul_ps(p, r);
    p = _mm256_mul_ps(p, r);
    p = _mm256_add_ps(p, r);
    p = _mm256_add_ps(p, _mm256_set1_ps(1.0f));
    const __m256i n = _mm256_cvttps_epi32(nf);
    const __m256i expo = _mm256_slli_epi32(_mm256_add_epi32(n, _mm256_set1_epi32(127)), 23);
    return _mm256_mul_ps(p, _mm256_castsi256_ps(expo));
}

void exp_decay(const float* d, std::size_t n, float rate, float scale, float* y) {
    const __m256 ratev = _mm256_set1_ps(rate);
    const __m256 scalev = _mm256_set1_ps(scale);
    const __m256 signbit = _mm256_set1_ps(-0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 x = _mm256_xor_ps(_mm256_mul_ps(_mm256_loadu_ps(d + i), ratev), signbit);
        _mm256_storeu_ps(y + i, _mm256_mul_ps(exp_neg8(x), scalev));
    }
    for (; i < n; ++i) y[i] = ref::exp_neg(-(d[i] * rate)) * scale;
}

void adam_update(float* p, const float* g, float* m, float* v, std::size_t n,
                 float lr, float beta1, float beta2, float eps, float bc1, float bc2) {
    const float omb1 = 1.0f - beta1;
    const float omb2 = 1.0f - beta2;
    const __m256 b1v = _mm256_set1_ps(beta1);
    const __m256 b2v = _mm256_set1_ps(beta2);
    const __m256 omb1v = _mm256_set1_ps(omb1);
    const __m256 omb2v = _mm256_set1_ps(omb2);
    const __m256 bc1v = _mm256_set1_ps(bc1);
    const __m256 bc2v = _mm256_set1_ps(bc2);
    const __m256 lrv = _mm256_set1_ps(lr);
    const __m256 epsv = _mm256_set1_ps(eps);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gv = _mm256_loadu_ps(g + i);
        const __m256 mv = _mm256_add_ps(_mm256_mul_ps(b1v, _mm256_loadu_ps(m + i)),
                                        _mm256_mul_ps(omb1v, gv));
        const __m256 vv = _mm256_add_ps(_mm256_mul_ps(b2v, _mm256_loadu_ps(v + i)),
                                        _mm256_mul_ps(omb2v, _mm256_mul_ps(gv, gv)));
        _mm256_storeu_ps(m + i, mv);
        _mm256_storeu_ps(v + i, vv);
        const __m256 mhat = _mm256_mul_ps(mv, bc1v);
        const __m256 vhat = _mm256_mul_ps(vv, bc2v);
        const __m256 den = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(lrv, mhat), den);
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + omb1 * g[i];
        v[i] = beta2 * v[i] + omb2 * (g[i] * g[i]);
        const float mhat = m[i] * bc1;
        const float vhat = v[i] * bc2;
        p[i] = p[i] - (lr * mhat) / (std::sqrt(vhat) + eps);
    }
}

} // namespace

const Backend kAvx2Backend = {
    conv1d_forward,
    conv1d_backward_input,
    conv1d_backward_params,
    pointwise_forward,
    pointwise_backward_input,
    pointwise_backward_params,
    relu_forward,
    relu_backward,
    accumulate,
    exp_decay,
    adam_update,
};

} // namespace segtcn::kernels::detail

#endif // x86_64
