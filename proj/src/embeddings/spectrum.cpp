// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/embeddings/spectrum.hpp"

#include <cmath>
#include <string>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::embeddings {

FrequencySpectrum::FrequencySpectrum(double base, std::size_t n_pairs, double position_scale)
    : base_(base), position_scale_(position_scale) {
  if (!(base > 1.0)) throw ConfigurationError("frequency base must exceed 1");
  if (!(position_scale > 0.0)) throw ConfigurationError("position scale must be positive");
  frequencies_.resize(n_pairs);
  const double log_base = std::log(base);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    frequencies_[i] = std::exp(-log_base * static_cast<double>(i) / static_cast<double>(n_pairs));
  }
}

void ChannelPartition::validate(std::size_t head_dim) const {
  if (head_dim % 2 != 0) throw ConfigurationError("head_dim must be even");
  if (pairs_x != pairs_y) {
    throw ConfigurationError("channel partition must give x and y the same number of pairs");
  }
  if (total_pairs() != head_dim / 2) {
    throw ConfigurationError("channel partition covers " + std::to_string(total_pairs()) +
                             " pairs but head_dim/2 = " + std::to_string(head_dim / 2));
  }
}

ChannelPartition scaled(const ChannelPartition& p, std::size_t factor) {
  return {p.pairs_t * factor, p.pairs_x * factor, p.pairs_y * factor};
}

}  // namespace streamrope::embeddings
