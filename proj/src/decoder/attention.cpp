// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/decoder/attention.hpp"

#include <cmath>

#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/ops.hpp"

namespace streamrope::decoder {

using numerics::DenseMatrix;
using numerics::Var;

DenseMatrix xavier_uniform(std::size_t in, std::size_t out, numerics::CounterRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  DenseMatrix m(in, out);
  for (double& v : m.values()) v = rng.uniform(-limit, limit);
  return m;
}

AttentionWeights AttentionWeights::create(numerics::ParameterStore& store,
                                          const std::string& prefix, std::size_t dim,
                                          numerics::CounterRng rng) {
  AttentionWeights w;
  auto weight = [&](const char* name) {
    return &store.create(prefix + "." + name, xavier_uniform(dim, dim, rng));
  };
  auto bias = [&](const char* name) {
    return &store.create(prefix + "." + name, DenseMatrix(1, dim));
  };
  w.wq = weight("wq");
  w.bq = bias("bq");
  w.wk = weight("wk");
  w.bk = bias("bk");
  w.wv = weight("wv");
  w.bv = bias("bv");
  w.wo = weight("wo");
  w.bo = bias("bo");
  return w;
}

Var linear(Var x, numerics::Parameter& w, numerics::Parameter& b) {
  numerics::Tape& t = x.tape();
  return numerics::add_row(numerics::matmul(x, t.param(w)), t.param(b));
}

Var rotary_attention(const AttentionWeights& w, Var queries, Var query_coords, Var keys,
                     Var key_coords, Var values, std::size_t heads,
                     const embeddings::AngleProjection* rotary, AttentionTrace* trace) {
  const std::size_t dim = queries.cols();
  if (heads == 0 || dim % heads != 0) throw ConfigurationError("attention: dim not divisible by heads");
  if (keys.rows() != values.rows()) {
    throw ConfigurationError("attention: key and value row counts differ");
  }
  if (keys.cols() != dim || values.cols() != dim) {
    throw ConfigurationError("attention: key/value width differs from query width");
  }
  const std::size_t head_dim = dim / heads;

  Var q = linear(queries, *w.wq, *w.bq);
  Var k = linear(keys, *w.wk, *w.bk);
  const Var v = linear(values, *w.wv, *w.bv);

  if (rotary != nullptr) {
    if (2 * rotary->pairs() != head_dim) {
      throw ConfigurationError("attention: rotary covers " + std::to_string(2 * rotary->pairs()) +
                               " channels, head_dim is " + std::to_string(head_dim));
    }
    if (!query_coords.valid() || query_coords.rows() != queries.rows() || !key_coords.valid() ||
        key_coords.rows() != keys.rows()) {
      throw ConfigurationError("attention: one coordinate row per query and key required");
    }
    q = embeddings::rotate_pairs(q, rotary->angles(query_coords));
    k = embeddings::rotate_pairs(k, rotary->angles(key_coords));
  }

  if (trace != nullptr) {
    trace->logits.clear();
    trace->weights.clear();
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Var> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Var qh = numerics::slice_cols(q, h * head_dim, head_dim);
    const Var kh = numerics::slice_cols(k, h * head_dim, head_dim);
    const Var vh = numerics::slice_cols(v, h * head_dim, head_dim);
    const Var logits = numerics::scale(numerics::matmul_nt(qh, kh), inv_sqrt);
    const Var weights = numerics::softmax_rows(logits);
    if (trace != nullptr) {
      trace->logits.push_back(logits.value());
      trace->weights.push_back(weights.value());
    }
    outputs.push_back(numerics::matmul(weights, vh));
  }
  return linear(numerics::concat_cols(outputs), *w.wo, *w.bo);
}

}  // namespace streamrope::decoder
