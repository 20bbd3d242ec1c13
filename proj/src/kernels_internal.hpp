// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace segtcn::kernels::detail {

struct Backend {
    void (*conv1d_forward)(const float*, int, int, const float*, const float*,
                           int, int, int, float*);
    void (*conv1d_backward_input)(const float*, const float*, int, int, int,
                                  int, int, float*);
    void (*conv1d_backward_params)(const float*, const float*, int, int, int,
                                   int, int, float*, float*);
    void (*pointwise_forward)(const float*, int, int, const float*,
                              const float*, int, float*);
    void (*pointwise_backward_input)(const float*, const float*, int, int, int,
                                     float*);
    void (*pointwise_backward_params)(const float*, const float*, int, int,
                                      int, float*, float*);
    void (*relu_forward)(const float*, std::size_t, float*);
    void (*relu_backward)(const float*, const float*, std::size_t, float*);
    void (*accumulate)(const float*, std::size_t, float*);
    void (*exp_decay)(const float*, std::size_t, float, float, float*);
    void (*adam_update)(float*, const float*, float*, float*, std::size_t,
                        float, float, float, float, float, float);
};

#if defined(__x86_64__) || defined(_M_X64)
extern const Backend kAvx2Backend;
#endif

} // namespace segtcn::kernels::detail
