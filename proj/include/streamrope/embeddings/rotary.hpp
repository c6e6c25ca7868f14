// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "streamrope/embeddings/coords.hpp"
#include "streamrope/embeddings/spectrum.hpp"
#include "streamrope/numerics/dense_matrix.hpp"
#include "streamrope/numerics/tape.hpp"

namespace streamrope::embeddings {

// Per-pair rotation angles, laid out [theta_t | theta_x | theta_y].
struct RotaryAngles {
  ChannelPartition partition;
  std::vector<double> angles;

  std::span<const double> t_block() const { return {angles.data(), partition.pairs_t}; }
  std::span<const double> x_block() const {
    return {angles.data() + partition.x_offset(), partition.pairs_x};
  }
  std::span<const double> y_block() const {
    return {angles.data() + partition.y_offset(), partition.pairs_y};
  }
};

// theta = coord_b * S_b * omega_b,i for each axis block b.
RotaryAngles mrope_angles(const SpatioTemporalCoord& coord, const ChannelPartition& partition,
                          const FrequencySpectrum& spec_t, const FrequencySpectrum& spec_xy);

// Rotates consecutive channel pairs (v[2i], v[2i+1]) by angles[i].
std::vector<double> apply_rotation(std::span<const double> v, std::span<const double> angles);
std::vector<double> apply_rotation(std::span<const double> v, const RotaryAngles& angles);

// Linear map from [t, x, y] coordinate rows to angle rows. Row b of the 3 x P
// matrix holds S_b * omega_b in its own block and zeros elsewhere, so
// angles = coords * matrix reproduces mrope_angles row by row.
class AngleProjection {
 public:
  AngleProjection(const ChannelPartition& partition, const FrequencySpectrum& spec_t,
                  const FrequencySpectrum& spec_xy);

  const ChannelPartition& partition() const { return partition_; }
  std::size_t pairs() const { return matrix_.cols(); }
  const numerics::DenseMatrix& matrix() const { return matrix_; }

  numerics::DenseMatrix angles(const numerics::DenseMatrix& coords) const;
  numerics::Var angles(numerics::Var coords) const;

 private:
  ChannelPartition partition_;
  numerics::DenseMatrix matrix_;
};

// Rotates each row of x (n x C) by the matching row of angles (n x P). C must
// be a multiple of 2P; every 2P-wide head block gets the same rotation.
// Differentiable in both arguments.
numerics::Var rotate_pairs(numerics::Var x, numerics::Var angles);

// n x P angles -> n x 2P rows of interleaved [sin, cos].
numerics::Var sincos_pairs(numerics::Var angles);

}  // namespace streamrope::embeddings
