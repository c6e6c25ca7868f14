// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace streamrope::embeddings {

// Geometric frequency ladder omega_i = base^(-i / n_pairs), i = 0..n_pairs-1,
// together with the scale that maps a normalized coordinate onto a
// position-like range before it meets the frequencies.
class FrequencySpectrum {
 public:
  FrequencySpectrum(double base, std::size_t n_pairs, double position_scale);

  double base() const { return base_; }
  std::size_t n_pairs() const { return frequencies_.size(); }
  double position_scale() const { return position_scale_; }
  double frequency(std::size_t i) const { return frequencies_.at(i); }
  const std::vector<double>& frequencies() const { return frequencies_; }

 private:
  double base_;
  double position_scale_;
  std::vector<double> frequencies_;
};

// Number of channel pairs given to each axis, laid out [t | x | y].
struct ChannelPartition {
  std::size_t pairs_t = 2;
  std::size_t pairs_x = 3;
  std::size_t pairs_y = 3;

  std::size_t total_pairs() const { return pairs_t + pairs_x + pairs_y; }
  std::size_t x_offset() const { return pairs_t; }
  std::size_t y_offset() const { return pairs_t + pairs_x; }

  // Throws ConfigurationError unless the partition covers head_dim / 2 pairs
  // with equal spatial blocks.
  void validate(std::size_t head_dim) const;

  bool operator==(const ChannelPartition&) const = default;
};

// Scales a per-head partition to `factor` heads (used by additive embeddings
// that span the whole model width).
ChannelPartition scaled(const ChannelPartition& p, std::size_t factor);

}  // namespace streamrope::embeddings
