// Copyright 2026 The SegTCN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace segtcn {

// Bad inputs: malformed files, violated invariants, incompatible shapes.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Failures during an otherwise valid run (I/O, diverging loss, ...).
// The CLI maps these to exit code 2.
class RuntimeError : public std::runtime_error {
public:
    explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace segtcn
