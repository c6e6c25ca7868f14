// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "streamrope/decoder/decoder.hpp"
#include "streamrope/embeddings/coords.hpp"
#include "streamrope/numerics/dense_matrix.hpp"

namespace streamrope::scenes {

using embeddings::BevPoint;

struct SceneConfig {
  double extent = 50.0;
  std::size_t grid_n = 16;
  std::size_t n_objects = 4;
  std::size_t frames = 8;
  double speed_min = 0.5;
  double speed_max = 3.0;
  double noise_sigma = 0.05;
  std::size_t token_feature_dim = 64;
  std::uint64_t seed = 0;

  double cell_width() const { return 2.0 * extent / static_cast<double>(grid_n); }
  void validate() const;
};

struct GtObject {
  BevPoint center;
  BevPoint velocity;  // extent units per frame
  int cls = 1;

  bool operator==(const GtObject&) const = default;
};

struct EpisodeFrame {
  std::int64_t frame_id = 0;
  numerics::DenseMatrix tokens;        // grid_n^2 x token_feature_dim
  std::vector<BevPoint> token_coords;  // cell centers, row-major (iy * grid_n + ix)
  std::vector<GtObject> objects;

  decoder::FrameTokens as_tokens() const { return {tokens, token_coords, frame_id}; }
  bool operator==(const EpisodeFrame&) const = default;
};

using Episode = std::vector<EpisodeFrame>;

struct TokenRaster {
  numerics::DenseMatrix tokens;
  std::vector<BevPoint> coords;
};

// Positions and velocities are snapped to multiples of this value so that
// center_k = center_0 + k * velocity and all frame differences are exact.
inline constexpr double kCoordinateQuantum = 0x1.0p-24;

// Random objects from the config seed: centers uniform in [-R/2, R/2]^2,
// headings uniform, speeds uniform in [speed_min, speed_max].
Episode generate_episode(const SceneConfig& config);

// Advances `initial` objects linearly for config.frames frames and rasterizes
// each frame. Initial states are used as given.
Episode make_episode(const SceneConfig& config, const std::vector<GtObject>& initial);

// Channel 0: sum of isotropic Gaussians (sigma = cell width) centered on the
// objects. Other channels: Gaussian noise * noise_sigma from the
// (seed, frame, noise) stream.
TokenRaster rasterize_tokens(const std::vector<GtObject>& objects, const SceneConfig& config,
                             std::int64_t frame_id);

std::vector<BevPoint> cell_centers(const SceneConfig& config);

// Plain-text episode dump for cross-implementation diffing:
//   episode extent=.. grid_n=.. n_objects=.. frames=.. speed_min=.. speed_max=..
//           noise_sigma=.. token_feature_dim=.. seed=..
//   token <frame> <index> <x> <y> <f_0> ... <f_{D-1}>
//   object <frame> <index> <cx> <cy> <vx> <vy> <class>
// Reals use 17 significant digits; fields are single-space separated.
void write_episode(std::ostream& out, const SceneConfig& config, const Episode& episode);
// Inverse of write_episode; throws ConfigurationError on malformed input.
Episode read_episode(std::istream& in, SceneConfig* config_out = nullptr);

}  // namespace streamrope::scenes
