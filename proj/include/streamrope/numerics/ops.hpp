// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "streamrope/numerics/tape.hpp"

// Differentiable primitives over tape values. Shapes are always explicit: the
// only broadcast is a 1 x cols row applied to every row (`add_row`).
namespace streamrope::numerics {

Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);  // a * b^T

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var add_row(Var a, Var row);
Var scale(Var a, double factor);
Var affine(Var a, double factor, double shift);
Var clamp(Var a, double lo, double hi);

Var sum(Var a);
Var mean(Var a);

Var softmax_rows(Var m);
Var layer_norm_affine(Var x, Var gain, Var bias, double eps = 1e-5);

Var gelu(Var a);
Var sigmoid(Var a);
Var abs(Var a);
Var square(Var a);
// Elementwise softplus(z) - y * z, the logit form of binary cross-entropy.
Var bce_with_logits(Var logits, const DenseMatrix& targets);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var a, std::span<const std::size_t> rows);

}  // namespace streamrope::numerics
