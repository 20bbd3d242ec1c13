// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace segtcn {

// Worker count: SEGTCN_THREADS if set (clamped to >= 1), else the
// hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one
// per worker; every index is processed exactly once, so writes to
// per-index slots stay deterministic regardless of the worker count.
// Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int max_threads = 0);

} // namespace segtcn
