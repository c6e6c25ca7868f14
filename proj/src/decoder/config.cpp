// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/decoder/config.hpp"

#include <array>
#include <utility>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::decoder {

namespace {

constexpr std::array<std::pair<EmbeddingMode, std::string_view>, 5> kModeNames{{
    {EmbeddingMode::kNone, "none"},
    {EmbeddingMode::kLearnable, "learnable"},
    {EmbeddingMode::kSinusoidalAdditive, "sinusoidal_additive"},
    {EmbeddingMode::kRopeSpatial, "rope_spatial"},
    {EmbeddingMode::kMropeSpatiotemporal, "mrope_spatiotemporal"},
}};

}  // namespace

std::string_view to_string(EmbeddingMode mode) {
  for (const auto& [m, name] : kModeNames)
    if (m == mode) return name;
  return "unknown";
}

EmbeddingMode parse_embedding_mode(std::string_view name) {
  for (const auto& [m, n] : kModeNames)
    if (n == name) return m;
  throw ConfigurationError("unknown embedding mode '" + std::string(name) + "'");
}

embeddings::ChannelPartition DecoderConfig::rotary_partition() const {
  if (embedding_mode == EmbeddingMode::kRopeSpatial) {
    const std::size_t half = head_dim() / 4;
    return {0, half, half};
  }
  return partition;
}

void DecoderConfig::validate() const {
  if (model_dim == 0 || heads == 0 || model_dim % heads != 0) {
    throw ConfigurationError("model_dim must be a positive multiple of heads");
  }
  if (head_dim() % 2 != 0) throw ConfigurationError("head_dim must be even");
  if (layers == 0 || n_queries == 0 || ffn_dim == 0) {
    throw ConfigurationError("layers, n_queries and ffn_dim must be positive");
  }
  if (memory_max_age == 0 || memory_capacity < memory_max_age) {
    throw ConfigurationError("memory_capacity must be >= memory_max_age >= 1");
  }
  if (learnable_grid == 0) throw ConfigurationError("learnable_grid must be positive");
  if (!(layer_norm_eps > 0.0)) throw ConfigurationError("layer_norm_eps must be positive");
  partition.validate(head_dim());
  if (embedding_mode == EmbeddingMode::kRopeSpatial && head_dim() % 4 != 0) {
    throw ConfigurationError("rope_spatial needs head_dim divisible by 4");
  }
  if (!(base > 1.0) || !(position_scale > 0.0) || !(time_scale > 0.0)) {
    throw ConfigurationError("base must exceed 1 and position scales must be positive");
  }
}

}  // namespace streamrope::decoder
