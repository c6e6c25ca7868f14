// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "streamrope/embeddings/rotary.hpp"
#include "streamrope/numerics/random.hpp"
#include "streamrope/numerics/tape.hpp"

namespace streamrope::decoder {

// Projection weights of one multi-head attention block. Weights are stored
// (in x out) and applied as x * W + b.
struct AttentionWeights {
  numerics::Parameter* wq = nullptr;
  numerics::Parameter* bq = nullptr;
  numerics::Parameter* wk = nullptr;
  numerics::Parameter* bk = nullptr;
  numerics::Parameter* wv = nullptr;
  numerics::Parameter* bv = nullptr;
  numerics::Parameter* wo = nullptr;
  numerics::Parameter* bo = nullptr;

  static AttentionWeights create(numerics::ParameterStore& store, const std::string& prefix,
                                 std::size_t dim, numerics::CounterRng rng);
};

// Per-head logits (after 1/sqrt(head_dim) scaling) and softmax weights.
struct AttentionTrace {
  std::vector<numerics::DenseMatrix> logits;
  std::vector<numerics::DenseMatrix> weights;
};

// Multi-head scaled dot-product attention. With `rotary` set, the projected
// queries and keys are rotated per head by the angles of their coordinates
// (n x 3 rows of [t, x, y]); values are never rotated. `keys` feeds the key
// projection and `values` the value projection, so additive position terms
// can be applied to keys alone.
numerics::Var rotary_attention(const AttentionWeights& w, numerics::Var queries,
                               numerics::Var query_coords, numerics::Var keys,
                               numerics::Var key_coords, numerics::Var values, std::size_t heads,
                               const embeddings::AngleProjection* rotary,
                               AttentionTrace* trace = nullptr);

// x * W + b for (in x out) W and (1 x out) b.
numerics::Var linear(numerics::Var x, numerics::Parameter& w, numerics::Parameter& b);

// Xavier-uniform (in x out) matrix.
numerics::DenseMatrix xavier_uniform(std::size_t in, std::size_t out, numerics::CounterRng& rng);

}  // namespace streamrope::decoder
