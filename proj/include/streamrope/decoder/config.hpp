// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "streamrope/embeddings/spectrum.hpp"

namespace streamrope::decoder {

enum class EmbeddingMode {
  kNone,
  kLearnable,
  kSinusoidalAdditive,
  kRopeSpatial,
  kMropeSpatiotemporal,
};

std::string_view to_string(EmbeddingMode mode);
// Accepts the snake_case names used on the command line and in config files.
EmbeddingMode parse_embedding_mode(std::string_view name);

struct DecoderConfig {
  std::size_t model_dim = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t n_queries = 16;
  std::size_t ffn_dim = 128;

  // Per-head split of rotary channel pairs. (8, 12, 12) at head_dim 64 scaled
  // to the default head_dim of 16.
  embeddings::ChannelPartition partition{2, 3, 3};
  double base = 10000.0;
  double position_scale = 128.0;
  double time_scale = 32.0;
  EmbeddingMode embedding_mode = EmbeddingMode::kMropeSpatiotemporal;

  // Rotary toggles per attention type.
  bool rope_self = true;
  bool rope_cross = true;
  // Stamp memory entries with the current frame instead of their origin frame.
  bool memory_restamp = false;

  std::size_t memory_capacity = 64;
  std::size_t memory_max_age = 4;

  // Grid resolution used to quantize coordinates for the learnable table.
  std::size_t learnable_grid = 16;
  bool zero_init_heads = true;
  double layer_norm_eps = 1e-5;

  std::size_t head_dim() const { return model_dim / heads; }
  std::size_t per_frame_keep() const { return memory_capacity / memory_max_age; }

  bool uses_rotary() const {
    return embedding_mode == EmbeddingMode::kRopeSpatial ||
           embedding_mode == EmbeddingMode::kMropeSpatiotemporal;
  }
  // Partition actually applied by the rotary modes. rope_spatial drops the
  // temporal block and splits every pair evenly between x and y.
  embeddings::ChannelPartition rotary_partition() const;

  void validate() const;
};

}  // namespace streamrope::decoder
