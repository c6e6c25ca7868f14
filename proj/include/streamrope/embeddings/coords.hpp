// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "streamrope/numerics/tape.hpp"

namespace streamrope::embeddings {

// Point on the ground plane in extent units, origin at the scene center.
struct BevPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const BevPoint&) const = default;
};

// Normalized (x, y, t), each in [0, 1].
struct SpatioTemporalCoord {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

// clamp((v + R) / 2R, 0, 1) per axis.
std::pair<double, double> normalize_bev(double x, double y, double extent);

// clamp(frame_id / T, 0, 1).
double normalize_time(std::int64_t frame_id, std::size_t window);

// Maps raw BEV points and frame ids into the unit cube. `shift` is added to
// every normalized coordinate before clamping; it moves the whole scene rigidly
// in normalized space and is zero in normal operation.
struct CoordNormalizer {
  double extent = 50.0;
  std::size_t window = 8;
  SpatioTemporalCoord shift{};

  SpatioTemporalCoord normalize(BevPoint p, std::int64_t frame_id) const;
  double time(std::int64_t frame_id) const;

  // Differentiable version for an n x 2 matrix of (x, y) points.
  numerics::Var normalize_points(numerics::Var xy) const;
  // n x 3 matrix with columns [t, x, y], matching the rotary block layout.
  numerics::Var coords(numerics::Var xy, std::span<const std::int64_t> frame_ids) const;
};

}  // namespace streamrope::embeddings
