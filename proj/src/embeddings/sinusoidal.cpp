// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/embeddings/sinusoidal.hpp"

#include <cmath>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::embeddings {

std::vector<double> sinusoidal_pe(double pos, std::size_t dim, double base) {
  if (dim % 2 != 0) throw ConfigurationError("sinusoidal_pe: dim must be even");
  if (!(base > 1.0)) throw ConfigurationError("sinusoidal_pe: base must exceed 1");
  std::vector<double> out(dim);
  const double log_base = std::log(base);
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double freq =
        std::exp(-log_base * static_cast<double>(2 * i) / static_cast<double>(dim));
    out[2 * i] = std::sin(pos * freq);
    out[2 * i + 1] = std::cos(pos * freq);
  }
  return out;
}

}  // namespace streamrope::embeddings
