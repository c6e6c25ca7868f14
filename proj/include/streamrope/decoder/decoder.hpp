// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "streamrope/decoder/attention.hpp"
#include "streamrope/decoder/config.hpp"
#include "streamrope/decoder/memory.hpp"
#include "streamrope/embeddings/coords.hpp"
#include "streamrope/embeddings/learnable.hpp"
#include "streamrope/embeddings/rotary.hpp"
#include "streamrope/numerics/tape.hpp"

namespace streamrope::decoder {

using embeddings::BevPoint;

struct Detection {
  BevPoint center;
  BevPoint velocity;  // extent units per frame
  double class_prob = 0.0;
};

// Scene tokens of one frame: features (n x model_dim) and the BEV cell center
// each row was rasterized at.
struct FrameTokens {
  numerics::DenseMatrix features;
  std::vector<BevPoint> positions;
  std::int64_t frame_id = 0;
};

struct PredictionHeads {
  numerics::Parameter* center_w = nullptr;  // model_dim x 2
  numerics::Parameter* center_b = nullptr;
  numerics::Parameter* velocity_w = nullptr;  // model_dim x 2
  numerics::Parameter* velocity_b = nullptr;
  numerics::Parameter* class_w = nullptr;  // model_dim x 1
  numerics::Parameter* class_b = nullptr;
};

// center = anchor + offset head, velocity = linear head, class = sigmoid(logit).
Detection prediction_heads(const PredictionHeads& heads, std::span<const double> feature,
                           BevPoint anchor);

struct FrameOutput {
  numerics::Var features;      // n_queries x model_dim, final layer norm applied
  numerics::Var centers;       // n_queries x 2
  numerics::Var velocities;    // n_queries x 2
  numerics::Var class_logits;  // n_queries x 1
  std::vector<Detection> detections;
};

struct DecodeTrace {
  std::vector<AttentionTrace> self_attention;
  std::vector<AttentionTrace> cross_attention;
};

// Object-query decoder with hybrid self-attention over [queries | memory],
// cross-attention to scene tokens and a feedforward block per layer, all
// pre-norm residual.
class StreamingDecoder {
 public:
  StreamingDecoder(DecoderConfig config, embeddings::CoordNormalizer normalizer,
                   std::uint64_t seed);
  StreamingDecoder(const StreamingDecoder& other);
  StreamingDecoder& operator=(const StreamingDecoder&) = delete;

  const DecoderConfig& config() const { return config_; }
  const embeddings::CoordNormalizer& normalizer() const { return normalizer_; }
  void set_normalizer(const embeddings::CoordNormalizer& n) { normalizer_ = n; }

  numerics::ParameterStore& parameters() { return params_; }
  const numerics::ParameterStore& parameters() const { return params_; }
  // Copies values of every same-named parameter; throws on any mismatch.
  void load_parameters(const numerics::ParameterStore& source);

  // n_queries x 2, extent units. Defaults to the centers of a uniform grid.
  const numerics::DenseMatrix& anchors() const { return anchors_; }
  void set_anchors(numerics::DenseMatrix anchors);

  const PredictionHeads& heads() const { return heads_; }

  FrameOutput decode_frame(numerics::Tape& tape, const FrameTokens& tokens,
                           const MemoryQueue& memory, DecodeTrace* trace = nullptr) const;

  MemoryQueue empty_memory() const {
    return MemoryQueue(config_.memory_capacity, config_.memory_max_age);
  }

 private:
  struct Layer {
    numerics::Parameter* ln1_g;
    numerics::Parameter* ln1_b;
    AttentionWeights self_attn;
    numerics::Parameter* ln2_g;
    numerics::Parameter* ln2_b;
    AttentionWeights cross_attn;
    numerics::Parameter* ln3_g;
    numerics::Parameter* ln3_b;
    numerics::Parameter* ffn_w1;
    numerics::Parameter* ffn_b1;
    numerics::Parameter* ffn_w2;
    numerics::Parameter* ffn_b2;
  };

  void build(std::uint64_t seed);
  void rebind();
  // Additive position term for `coords` rows (n x model_dim), or an invalid
  // Var when the embedding mode adds nothing.
  numerics::Var additive_embedding(numerics::Tape& tape, numerics::Var coords) const;

  DecoderConfig config_;
  embeddings::CoordNormalizer normalizer_;
  numerics::ParameterStore params_;
  numerics::DenseMatrix anchors_;

  std::vector<Layer> layers_;
  numerics::Parameter* query_embed_ = nullptr;
  numerics::Parameter* final_g_ = nullptr;
  numerics::Parameter* final_b_ = nullptr;
  PredictionHeads heads_;
  std::optional<embeddings::AngleProjection> rotary_;
  std::optional<embeddings::AngleProjection> additive_;
  std::unique_ptr<embeddings::LearnablePositionTable> spatial_table_;
  std::unique_ptr<embeddings::LearnablePositionTable> temporal_table_;
};

// Keeps the top per_frame_keep() queries by class probability (ties by query
// index) stamped with `current_frame`, drops entries that would exceed
// max_age at the next frame, then enforces capacity by evicting lowest scores.
MemoryQueue propagate_memory(const FrameOutput& output, const MemoryQueue& memory,
                             std::int64_t current_frame, const DecoderConfig& config);

// Cell centers of a ceil(sqrt(n))-wide grid over [-extent, extent]^2, first n
// in row-major order.
numerics::DenseMatrix grid_anchors(std::size_t n, double extent);

}  // namespace streamrope::decoder
