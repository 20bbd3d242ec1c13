// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Kernel semantics against hand oracles and bit-exact scalar/SIMD
// equivalence. The SIMD checks compare raw bytes: the two backends are
// required to round identically, not just approximately.

#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"

#include "segtcn/error.hpp"
#include "segtcn/kernels.hpp"
#include "segtcn/rng.hpp"

using namespace segtcn;

namespace {

std::vector<float> random_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
    return v;
}

bool bytes_equal(const std::vector<float>& a, const std::vector<float>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

struct IsaGuard {
    explicit IsaGuard(kernels::Isa isa) { kernels::force_isa(isa); }
    ~IsaGuard() { kernels::clear_forced_isa(); }
};

} // namespace

TEST_CASE("dilated conv matches the direct-convolution oracle") {
    // Single channel, x = [1,2,3,4], kernel [1,0,0], dilation 1: the only
    // live tap reads x[t-1], so y = [0,1,2,3] with the zero pad.
    const float x[4] = {1, 2, 3, 4};
    const float w[3] = {1, 0, 0};
    const float b[1] = {0};
    float y[4];
    kernels::ref::conv1d_forward(x, 1, 4, w, b, 1, 3, 1, y);
    CHECK(y[0] == 0.0f);
    CHECK(y[1] == 1.0f);
    CHECK(y[2] == 2.0f);
    CHECK(y[3] == 3.0f);

    // Identity kernel [0,1,0] is exact for any dilation.
    const float wi[3] = {0, 1, 0};
    float yi[4];
    kernels::ref::conv1d_forward(x, 1, 4, wi, b, 1, 3, 4, yi);
    for (int t = 0; t < 4; ++t) CHECK(yi[t] == x[t]);
}

TEST_CASE("dilated conv agrees with a brute-force padded oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int in_ch = 1 + static_cast<int>(rng.below(3));
        const int out_ch = 1 + static_cast<int>(rng.below(3));
        const int len = 1 + static_cast<int>(rng.below(13));
        const int ksize = 3;
        const int dilation = 1 + static_cast<int>(rng.below(5));
        const auto x = random_vec(static_cast<std::size_t>(in_ch) * len, rng);
        const auto w = random_vec(static_cast<std::size_t>(out_ch) * in_ch * ksize, rng);
        const auto b = random_vec(out_ch, rng);
        std::vector<float> y(static_cast<std::size_t>(out_ch) * len);
        kernels::ref::conv1d_forward(x.data(), in_ch, len, w.data(), b.data(), out_ch,
                                     ksize, dilation, y.data());
        for (int o = 0; o < out_ch; ++o) {
            for (int t = 0; t < len; ++t) {
                double want = b[o];
                for (int i = 0; i < in_ch; ++i) {
                    for (int k = 0; k < ksize; ++k) {
                        const int src = t + (k - 1) * dilation;
                        if (src < 0 || src >= len) continue;
                        want += static_cast<double>(w[(static_cast<std::size_t>(o) * in_ch + i) * 3 +
                                                      static_cast<std::size_t>(k)]) *
                                x[static_cast<std::size_t>(i) * len + src];
                    }
                }
                CHECK(y[static_cast<std::size_t>(o) * len + t] ==
                      doctest::Approx(want).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("pointwise conv is a per-frame linear map") {
    // weight [[1,1]] on a 2-channel input sums the channels.
    const float x[6] = {1, 2, 3, 10, 20, 30};
    const float w[2] = {1, 1};
    const float b[1] = {0};
    float y[3];
    kernels::ref::pointwise_forward(x, 2, 3, w, b, 1, y);
    CHECK(y[0] == 11.0f);
    CHECK(y[1] == 22.0f);
    CHECK(y[2] == 33.0f);

    // Identity weight, zero bias: y = x.
    const float wid[4] = {1, 0, 0, 1};
    const float b2[2] = {0, 0};
    float y2[6];
    kernels::ref::pointwise_forward(x, 2, 3, wid, b2, 2, y2);
    for (int i = 0; i < 6; ++i) CHECK(y2[i] == x[i]);
}

TEST_CASE("conv backward kernels match finite differences in double") {
    Rng rng(17);
    const int in_ch = 3, out_ch = 2, len = 9, ksize = 3, dilation = 2;
    std::vector<double> x(static_cast<std::size_t>(in_ch) * len);
    std::vector<double> w(static_cast<std::size_t>(out_ch) * in_ch * ksize);
    std::vector<double> b(out_ch);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : w) v = rng.uniform(-1, 1);
    for (double& v : b) v = rng.uniform(-1, 1);

    // Scalar objective: f = sum(y^2)/2, so dy = y.
    const auto objective = [&]() {
        std::vector<double> y(static_cast<std::size_t>(out_ch) * len);
        kernels::ref::conv1d_forward(x.data(), in_ch, len, w.data(), b.data(), out_ch,
                                     ksize, dilation, y.data());
        double f = 0;
        for (double v : y) f += v * v / 2;
        return f;
    };

    std::vector<double> y(static_cast<std::size_t>(out_ch) * len);
    kernels::ref::conv1d_forward(x.data(), in_ch, len, w.data(), b.data(), out_ch, ksize,
                                 dilation, y.data());
    std::vector<double> dx(x.size(), 0.0), dw(w.size(), 0.0), db(b.size(), 0.0);
    kernels::ref::conv1d_backward_input(y.data(), w.data(), in_ch, len, out_ch, ksize,
                                        dilation, dx.data());
    kernels::ref::conv1d_backward_params(y.data(), x.data(), in_ch, len, out_ch, ksize,
                                         dilation, dw.data(), db.data());

    const double step = 1e-5;
    const auto fd_check = [&](std::vector<double>& target, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double keep = target[i];
            target[i] = keep + step;
            const double hi = objective();
            target[i] = keep - step;
            const double lo = objective();
            target[i] = keep;
            const double numeric = (hi - lo) / (2 * step);
            const double denom = std::max({std::fabs(numeric), std::fabs(grad[i]), 1e-8});
            CHECK(std::fabs(numeric - grad[i]) / denom < 1e-6);
        }
    };
    fd_check(x, dx);
    fd_check(w, dw);
    fd_check(b, db);
}

TEST_CASE("scalar and simd backends are bit-identical") {
    if (!kernels::isa_supported(kernels::Isa::avx2)) {
        MESSAGE("avx2 unavailable; equivalence trivially holds");
        return;
    }
    Rng rng(23);
    // Lengths straddle the 8-wide vector width to exercise odd tails, and
    // dilations exceed the length to exercise empty tap ranges.
    for (int trial = 0; trial < 40; ++trial) {
        const int in_ch = 1 + static_cast<int>(rng.below(5));
        const int out_ch = 1 + static_cast<int>(rng.below(5));
        const int len = 1 + static_cast<int>(rng.below(33));
        const int ksize = 3;
        const int dilation = 1 + static_cast<int>(rng.below(40));
        const auto x = random_vec(static_cast<std::size_t>(in_ch) * len, rng);
        const auto w = random_vec(static_cast<std::size_t>(out_ch) * in_ch * ksize, rng);
        const auto b = random_vec(out_ch, rng);
        const auto dy = random_vec(static_cast<std::size_t>(out_ch) * len, rng);

        std::vector<float> y_s(static_cast<std::size_t>(out_ch) * len);
        std::vector<float> dx_s(x.size(), 0.5f), dw_s(w.size(), 0.25f), db_s(b.size(), -1.f);
        std::vector<float> y_v = y_s, dx_v = dx_s, dw_v = dw_s, db_v = db_s;

        {
            IsaGuard guard(kernels::Isa::scalar);
            kernels::conv1d_forward(x.data(), in_ch, len, w.data(), b.data(), out_ch,
                                    ksize, dilation, y_s.data());
            kernels::conv1d_backward_input(dy.data(), w.data(), in_ch, len, out_ch, ksize,
                                           dilation, dx_s.data());
            kernels::conv1d_backward_params(dy.data(), x.data(), in_ch, len, out_ch,
                                            ksize, dilation, dw_s.data(), db_s.data());
        }
        {
            IsaGuard guard(kernels::Isa::avx2);
            kernels::conv1d_forward(x.data(), in_ch, len, w.data(), b.data(), out_ch,
                                    ksize, dilation, y_v.data());
            kernels::conv1d_backward_input(dy.data(), w.data(), in_ch, len, out_ch, ksize,
                                           dilation, dx_v.data());
            kernels::conv1d_backward_params(dy.data(), x.data(), in_ch, len, out_ch,
                                            ksize, dilation, dw_v.data(), db_v.data());
        }
        REQUIRE(bytes_equal(y_s, y_v));
        REQUIRE(bytes_equal(dx_s, dx_v));
        REQUIRE(bytes_equal(dw_s, dw_v));
        REQUIRE(bytes_equal(db_s, db_v));
    }
}

TEST_CASE("pointwise, relu, accumulate, exp, adam backends are bit-identical") {
    if (!kernels::isa_supported(kernels::Isa::avx2)) {
        MESSAGE("avx2 unavailable; equivalence trivially holds");
        return;
    }
    Rng rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        const int in_ch = 1 + static_cast<int>(rng.below(6));
        const int out_ch = 1 + static_cast<int>(rng.below(6));
        const int len = 1 + static_cast<int>(rng.below(41));
        const std::size_t n = static_cast<std::size_t>(in_ch) * len;
        const auto x = random_vec(n, rng);
        const auto w = random_vec(static_cast<std::size_t>(out_ch) * in_ch, rng);
        const auto b = random_vec(out_ch, rng);
        const auto dy = random_vec(static_cast<std::size_t>(out_ch) * len, rng);
        const auto d = random_vec(n, rng, 0.0, 50.0);
        const auto g = random_vec(n, rng);

        struct Buffers {
            std::vector<float> y, dx, dw, db, r, rb, acc, e, p, m, v;
        };
        const auto run = [&](kernels::Isa isa) {
            IsaGuard guard(isa);
            Buffers o;
            o.y.resize(static_cast<std::size_t>(out_ch) * len);
            o.dx.assign(n, 0.125f);
            o.dw.assign(w.size(), -0.5f);
            o.db.assign(b.size(), 1.0f);
            o.r.resize(n);
            o.rb.assign(n, 0.75f);
            o.acc.assign(n, 2.0f);
            o.e.resize(n);
            o.p = x;
            o.m.assign(n, 0.0f);
            o.v.assign(n, 0.0f);
            kernels::pointwise_forward(x.data(), in_ch, len, w.data(), b.data(), out_ch,
                                       o.y.data());
            kernels::pointwise_backward_input(dy.data(), w.data(), in_ch, len, out_ch,
                                              o.dx.data());
            kernels::pointwise_backward_params(dy.data(), x.data(), in_ch, len, out_ch,
                                               o.dw.data(), o.db.data());
            kernels::relu_forward(x.data(), n, o.r.data());
            kernels::relu_backward(x.data(), g.data(), n, o.rb.data());
            kernels::accumulate(x.data(), n, o.acc.data());
            kernels::exp_decay(d.data(), n, 0.694f, 0.9f, o.e.data());
            kernels::adam_update(o.p.data(), g.data(), o.m.data(), o.v.data(), n, 1e-3f,
                                 0.9f, 0.999f, 1e-8f, 10.0f, 1000.0f);
            return o;
        };
        const Buffers s = run(kernels::Isa::scalar);
        const Buffers v = run(kernels::Isa::avx2);
        REQUIRE(bytes_equal(s.y, v.y));
        REQUIRE(bytes_equal(s.dx, v.dx));
        REQUIRE(bytes_equal(s.dw, v.dw));
        REQUIRE(bytes_equal(s.db, v.db));
        REQUIRE(bytes_equal(s.r, v.r));
        REQUIRE(bytes_equal(s.rb, v.rb));
        REQUIRE(bytes_equal(s.acc, v.acc));
        REQUIRE(bytes_equal(s.e, v.e));
        REQUIRE(bytes_equal(s.p, v.p));
        REQUIRE(bytes_equal(s.m, v.m));
        REQUIRE(bytes_equal(s.v, v.v));
    }
}

TEST_CASE("exp_neg is exact at 0 and within 2 ulp of std::exp") {
    CHECK(kernels::ref::exp_neg(0.0f) == 1.0f);
    Rng rng(31);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const float x = static_cast<float>(-rng.uniform(0.0, 87.0));
        const double want = std::exp(static_cast<double>(x));
        const double got = kernels::ref::exp_neg(x);
        worst = std::max(worst, std::fabs(got - want) / want);
    }
    CHECK(worst < 3e-7);
    // Deep underflow saturates at the clamp instead of misbehaving.
    CHECK(kernels::ref::exp_neg(-1000.0f) == kernels::ref::exp_neg(-87.0f));
}

TEST_CASE("relu semantics") {
    const float x[5] = {-3.0f, -0.0f, 0.0f, 2.5f, -1e-30f};
    float y[5];
    kernels::ref::relu_forward(x, 5, y);
    CHECK(y[0] == 0.0f);
    CHECK(y[1] == 0.0f);
    CHECK(y[2] == 0.0f);
    CHECK(y[3] == 2.5f);
    CHECK(y[4] == 0.0f);
}

TEST_CASE("adam first step has closed form") {
    // g = 1 at step 1: m-hat = v-hat = 1, so p moves by lr/(1+eps).
    double p = 1.0, m = 0.0, v = 0.0;
    const double g = 1.0;
    kernels::ref::adam_update(&p, &g, &m, &v, 1, 0.001, 0.9, 0.999, 1e-8, 10.0, 1000.0);
    CHECK(std::fabs((1.0 - p) - 0.001) < 1e-10);
    CHECK(m == doctest::Approx(0.1));
    CHECK(v == doctest::Approx(0.001));

    // Float path lands within float rounding of the same step.
    float pf = 1.0f, mf = 0.0f, vf = 0.0f;
    const float gf = 1.0f;
    kernels::ref::adam_update(&pf, &gf, &mf, &vf, 1, 0.001f, 0.9f, 0.999f, 1e-8f, 10.0f,
                              1000.0f);
    CHECK(std::fabs((1.0f - pf) - 0.001f) < 1e-6f);

    // Zero gradient leaves the parameter bit-identical.
    float p2 = 0.75f, m2 = 0.0f, v2 = 0.0f;
    const float g2 = 0.0f;
    for (int step = 1; step <= 5; ++step)
        kernels::ref::adam_update(&p2, &g2, &m2, &v2, 1, 0.001f, 0.9f, 0.999f, 1e-8f,
                                  10.0f, 1000.0f);
    CHECK(p2 == 0.75f);
}

TEST_CASE("isa dispatch control") {
    CHECK(kernels::isa_supported(kernels::Isa::scalar));
    CHECK((kernels::active_isa() == kernels::Isa::scalar ||
           kernels::active_isa() == kernels::Isa::avx2));
    {
        IsaGuard guard(kernels::Isa::scalar);
        CHECK(kernels::active_isa() == kernels::Isa::scalar);
    }
    CHECK(std::string(kernels::isa_name(kernels::Isa::avx2)) == "avx2");
}
