// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/decoder/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/ops.hpp"

namespace streamrope::decoder {

using numerics::DenseMatrix;
using numerics::Parameter;
using numerics::Tape;
using numerics::Var;

namespace {

// Stream tags for parameter initialization.
enum InitStream : std::uint64_t {
  kQueryEmbed = 1,
  kLayerBase = 100,
  kHeads = 10,
  kSpatialTable = 20,
  kTemporalTable = 21,
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Var layer_norm(Tape& t, Var x, Parameter* g, Parameter* b, double eps) {
  return numerics::layer_norm_affine(x, t.param(*g), t.param(*b), eps);
}

Var maybe_add(Var a, Var b) { return b.valid() ? numerics::add(a, b) : a; }

}  // namespace

DenseMatrix grid_anchors(std::size_t n, double extent) {
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  DenseMatrix out(n, 2);
  const double wx = 2.0 * extent / static_cast<double>(cols);
  const double wy = 2.0 * extent / static_cast<double>(rows);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, 0) = -extent + (static_cast<double>(i % cols) + 0.5) * wx;
    out(i, 1) = -extent + (static_cast<double>(i / cols) + 0.5) * wy;
  }
  return out;
}

Detection prediction_heads(const PredictionHeads& heads, std::span<const double> feature,
                           BevPoint anchor) {
  const std::size_t dim = heads.center_w->value.rows();
  if (feature.size() != dim) throw ConfigurationError("prediction_heads: feature width mismatch");
  double off[2] = {heads.center_b->value(0, 0), heads.center_b->value(0, 1)};
  double vel[2] = {heads.velocity_b->value(0, 0), heads.velocity_b->value(0, 1)};
  double logit = heads.class_b->value(0, 0);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      off[c] += feature[i] * heads.center_w->value(i, c);
      vel[c] += feature[i] * heads.velocity_w->value(i, c);
    }
    logit += feature[i] * heads.class_w->value(i, 0);
  }
  return {{anchor.x + off[0], anchor.y + off[1]}, {vel[0], vel[1]}, sigmoid(logit)};
}

StreamingDecoder::StreamingDecoder(DecoderConfig config, embeddings::CoordNormalizer normalizer,
                                   std::uint64_t seed)
    : config_(std::move(config)), normalizer_(normalizer) {
  config_.validate();
  anchors_ = grid_anchors(config_.n_queries, normalizer_.extent);
  build(seed);
}

StreamingDecoder::StreamingDecoder(const StreamingDecoder& other)
    : config_(other.config_),
      normalizer_(other.normalizer_),
      params_(other.params_),
      anchors_(other.anchors_) {
  rebind();
}

void StreamingDecoder::set_anchors(DenseMatrix anchors) {
  if (anchors.rows() != config_.n_queries || anchors.cols() != 2) {
    throw ConfigurationError("anchors must be n_queries x 2");
  }
  anchors_ = std::move(anchors);
}

void StreamingDecoder::load_parameters(const numerics::ParameterStore& source) {
  if (source.size() != params_.size()) {
    throw ConfigurationError("parameter count mismatch: " + std::to_string(source.size()) +
                             " vs " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < source.size(); ++i) {
    Parameter& dst = params_.at(source[i].name);
    if (!dst.value.same_shape(source[i].value)) {
      throw ConfigurationError("parameter '" + source[i].name + "' has the wrong shape");
    }
    dst.value = source[i].value;
  }
}

void StreamingDecoder::build(std::uint64_t seed) {
  const numerics::CounterRng root(seed, {0x6465636F646572ULL});
  const std::size_t d = config_.model_dim;

  {
    auto rng = root.split(kQueryEmbed);
    DenseMatrix q(config_.n_queries, d);
    for (double& v : q.values()) v = rng.normal();
    params_.create("query_embed", std::move(q));
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l);
    auto rng = root.split(kLayerBase + l);
    params_.create(p + ".ln1.g", DenseMatrix(1, d, 1.0));
    params_.create(p + ".ln1.b", DenseMatrix(1, d));
    AttentionWeights::create(params_, p + ".self", d, rng.split(1));
    params_.create(p + ".ln2.g", DenseMatrix(1, d, 1.0));
    params_.create(p + ".ln2.b", DenseMatrix(1, d));
    AttentionWeights::create(params_, p + ".cross", d, rng.split(2));
    params_.create(p + ".ln3.g", DenseMatrix(1, d, 1.0));
    params_.create(p + ".ln3.b", DenseMatrix(1, d));
    auto ffn_rng = rng.split(3);
    params_.create(p + ".ffn.w1", xavier_uniform(d, config_.ffn_dim, ffn_rng));
    params_.create(p + ".ffn.b1", DenseMatrix(1, config_.ffn_dim));
    params_.create(p + ".ffn.w2", xavier_uniform(config_.ffn_dim, d, ffn_rng));
    params_.create(p + ".ffn.b2", DenseMatrix(1, d));
  }
  params_.create("final.ln.g", DenseMatrix(1, d, 1.0));
  params_.create("final.ln.b", DenseMatrix(1, d));
  {
    auto rng = root.split(kHeads);
    auto head = [&](std::size_t out) {
      return config_.zero_init_heads ? DenseMatrix(d, out) : xavier_uniform(d, out, rng);
    };
    params_.create("head.center.w", head(2));
    params_.create("head.center.b", DenseMatrix(1, 2));
    params_.create("head.velocity.w", head(2));
    params_.create("head.velocity.b", DenseMatrix(1, 2));
    params_.create("head.class.w", head(1));
    params_.create("head.class.b", DenseMatrix(1, 1));
  }
  if (config_.embedding_mode == EmbeddingMode::kLearnable) {
    const std::size_t g = config_.learnable_grid;
    embeddings::LearnablePositionTable(params_, "pos.spatial", g * g, d, root.split(kSpatialTable));
    embeddings::LearnablePositionTable(params_, "pos.temporal", normalizer_.window + 1, d,
                                       root.split(kTemporalTable));
  }
  rebind();
}

void StreamingDecoder::rebind() {
  auto at = [this](const std::string& name) { return &params_.at(name); };
  query_embed_ = at("query_embed");
  layers_.clear();
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l);
    auto attn = [&](const std::string& q) {
      AttentionWeights w;
      w.wq = at(q + ".wq");
      w.bq = at(q + ".bq");
      w.wk = at(q + ".wk");
      w.bk = at(q + ".bk");
      w.wv = at(q + ".wv");
      w.bv = at(q + ".bv");
      w.wo = at(q + ".wo");
      w.bo = at(q + ".bo");
      return w;
    };
    layers_.push_back(Layer{at(p + ".ln1.g"), at(p + ".ln1.b"), attn(p + ".self"),
                            at(p + ".ln2.g"), at(p + ".ln2.b"), attn(p + ".cross"),
                            at(p + ".ln3.g"), at(p + ".ln3.b"), at(p + ".ffn.w1"),
                            at(p + ".ffn.b1"), at(p + ".ffn.w2"), at(p + ".ffn.b2")});
  }
  final_g_ = at("final.ln.g");
  final_b_ = at("final.ln.b");
  heads_ = {at("head.center.w"),   at("head.center.b"), at("head.velocity.w"),
            at("head.velocity.b"), at("head.class.w"),  at("head.class.b")};

  rotary_.reset();
  additive_.reset();
  spatial_table_.reset();
  temporal_table_.reset();
  const auto rp = config_.rotary_partition();
  switch (config_.embedding_mode) {
    case EmbeddingMode::kRopeSpatial:
    case EmbeddingMode::kMropeSpatiotemporal:
      rotary_.emplace(rp, embeddings::FrequencySpectrum(config_.base, rp.pairs_t, config_.time_scale),
                      embeddings::FrequencySpectrum(config_.base, rp.pairs_x, config_.position_scale));
      break;
    case EmbeddingMode::kSinusoidalAdditive: {
      const auto wide = embeddings::scaled(config_.partition, config_.heads);
      additive_.emplace(
          wide, embeddings::FrequencySpectrum(config_.base, wide.pairs_t, config_.time_scale),
          embeddings::FrequencySpectrum(config_.base, wide.pairs_x, config_.position_scale));
      break;
    }
    case EmbeddingMode::kLearnable:
      spatial_table_ = std::make_unique<embeddings::LearnablePositionTable>(*at("pos.spatial"));
      temporal_table_ = std::make_unique<embeddings::LearnablePositionTable>(*at("pos.temporal"));
      break;
    case EmbeddingMode::kNone:
      break;
  }
}

Var StreamingDecoder::additive_embedding(Tape& tape, Var coords) const {
  if (additive_) return embeddings::sincos_pairs(additive_->angles(coords));
  if (spatial_table_) {
    const DenseMatrix& c = coords.value();
    std::vector<std::size_t> cells(c.rows()), steps(c.rows());
    for (std::size_t r = 0; r < c.rows(); ++r) {
      cells[r] = embeddings::spatial_cell_index({c(r, 1), c(r, 2), c(r, 0)}, config_.learnable_grid);
      steps[r] = embeddings::temporal_index(c(r, 0), normalizer_.window);
    }
    return numerics::add(embeddings::lookup_learnable(tape, *spatial_table_, cells),
                         embeddings::lookup_learnable(tape, *temporal_table_, steps));
  }
  return {};
}

FrameOutput StreamingDecoder::decode_frame(Tape& tape, const FrameTokens& tokens,
                                           const MemoryQueue& memory, DecodeTrace* trace) const {
  const std::size_t d = config_.model_dim;
  const std::size_t nq = config_.n_queries;
  if (tokens.features.rows() == 0) throw ConfigurationError("decode_frame: empty token set");
  if (tokens.features.cols() != d) {
    throw ConfigurationError("decode_frame: token width " + std::to_string(tokens.features.cols()) +
                             " != model_dim " + std::to_string(d));
  }
  if (tokens.positions.size() != tokens.features.rows()) {
    throw ConfigurationError("decode_frame: one position per token required");
  }
  if (!memory.well_formed(tokens.frame_id)) {
    throw ConfigurationError("decode_frame: memory queue violates its capacity or age bound");
  }

  const Var anchors = tape.constant(anchors_);
  const std::vector<std::int64_t> query_frames(nq, tokens.frame_id);
  const Var query_coords = normalizer_.coords(anchors, query_frames);

  DenseMatrix token_xy(tokens.positions.size(), 2);
  for (std::size_t i = 0; i < tokens.positions.size(); ++i) {
    token_xy(i, 0) = tokens.positions[i].x;
    token_xy(i, 1) = tokens.positions[i].y;
  }
  const std::vector<std::int64_t> token_frames(tokens.positions.size(), tokens.frame_id);
  const Var token_coords = normalizer_.coords(tape.constant(std::move(token_xy)), token_frames);
  const Var token_features = tape.constant(tokens.features);

  Var memory_features, memory_coords;
  if (!memory.empty()) {
    std::vector<Var> feats, xy;
    std::vector<std::int64_t> frames;
    for (const QueryState& e : memory.entries()) {
      feats.push_back(e.feature);
      xy.push_back(e.anchor);
      frames.push_back(config_.memory_restamp ? tokens.frame_id : e.frame_id);
    }
    memory_features = numerics::concat_rows(feats);
    memory_coords = normalizer_.coords(numerics::concat_rows(xy), frames);
  }

  const Var query_pe = additive_embedding(tape, query_coords);
  const Var token_pe = additive_embedding(tape, token_coords);
  const Var memory_pe = memory.empty() ? Var{} : additive_embedding(tape, memory_coords);

  Var kv_coords = query_coords;
  if (!memory.empty()) {
    const Var parts[2] = {query_coords, memory_coords};
    kv_coords = numerics::concat_rows(parts);
  }
  const embeddings::AngleProjection* rot = rotary_ ? &*rotary_ : nullptr;
  const embeddings::AngleProjection* self_rot = config_.rope_self ? rot : nullptr;
  const embeddings::AngleProjection* cross_rot = config_.rope_cross ? rot : nullptr;
  if (trace != nullptr) {
    trace->self_attention.assign(config_.layers, {});
    trace->cross_attention.assign(config_.layers, {});
  }

  const double eps = config_.layer_norm_eps;
  Var x = tape.param(*query_embed_);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const Layer& L = layers_[l];

    Var h = layer_norm(tape, x, L.ln1_g, L.ln1_b, eps);
    Var kv = h;
    Var kv_pe = query_pe;
    if (!memory.empty()) {
      const Var parts[2] = {h, memory_features};
      kv = numerics::concat_rows(parts);
      if (query_pe.valid()) {
        const Var pe_parts[2] = {query_pe, memory_pe};
        kv_pe = numerics::concat_rows(pe_parts);
      }
    }
    x = numerics::add(
        x, rotary_attention(L.self_attn, maybe_add(h, query_pe), query_coords, maybe_add(kv, kv_pe),
                            kv_coords, kv, config_.heads, self_rot,
                            trace ? &trace->self_attention[l] : nullptr));

    h = layer_norm(tape, x, L.ln2_g, L.ln2_b, eps);
    x = numerics::add(
        x, rotary_attention(L.cross_attn, maybe_add(h, query_pe), query_coords,
                            maybe_add(token_features, token_pe), token_coords, token_features,
                            config_.heads, cross_rot, trace ? &trace->cross_attention[l] : nullptr));

    h = layer_norm(tape, x, L.ln3_g, L.ln3_b, eps);
    const Var hidden = numerics::gelu(linear(h, *L.ffn_w1, *L.ffn_b1));
    x = numerics::add(x, linear(hidden, *L.ffn_w2, *L.ffn_b2));
  }

  FrameOutput out;
  out.features = layer_norm(tape, x, final_g_, final_b_, eps);
  out.centers = numerics::add(anchors, linear(out.features, *heads_.center_w, *heads_.center_b));
  out.velocities = linear(out.features, *heads_.velocity_w, *heads_.velocity_b);
  out.class_logits = linear(out.features, *heads_.class_w, *heads_.class_b);

  const DenseMatrix& c = out.centers.value();
  const DenseMatrix& v = out.velocities.value();
  const DenseMatrix& z = out.class_logits.value();
  out.detections.reserve(nq);
  for (std::size_t i = 0; i < nq; ++i) {
    out.detections.push_back({{c(i, 0), c(i, 1)}, {v(i, 0), v(i, 1)}, sigmoid(z(i, 0))});
  }
  return out;
}

MemoryQueue propagate_memory(const FrameOutput& output, const MemoryQueue& memory,
                             std::int64_t current_frame, const DecoderConfig& config) {
  const std::size_t n = output.detections.size();
  if (output.features.rows() != n || output.centers.rows() != n) {
    throw ConfigurationError("propagate_memory: detections and features are not aligned");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return output.detections[a].class_prob > output.detections[b].class_prob;
  });
  const std::size_t keep = std::min(config.per_frame_keep(), n);

  MemoryQueue next(memory.capacity(), memory.max_age());
  auto& entries = next.entries();
  for (std::size_t r = 0; r < keep; ++r) {
    const std::size_t i = order[r];
    const std::size_t row[1] = {i};
    entries.push_back({numerics::gather_rows(output.features, row),
                       numerics::gather_rows(output.centers, row), current_frame,
                       output.detections[i].class_prob});
  }
  for (const QueryState& e : memory.entries()) {
    if (current_frame - e.frame_id < static_cast<std::int64_t>(memory.max_age())) {
      entries.push_back(e);
    }
  }
  if (entries.size() > next.capacity()) {
    std::vector<std::size_t> rank(entries.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return entries[a].score > entries[b].score;
    });
    rank.resize(next.capacity());
    std::sort(rank.begin(), rank.end());
    std::vector<QueryState> kept;
    kept.reserve(rank.size());
    for (std::size_t i : rank) kept.push_back(entries[i]);
    entries = std::move(kept);
  }
  return next;
}

}  // namespace streamrope::decoder
