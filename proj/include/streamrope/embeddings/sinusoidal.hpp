// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace streamrope::embeddings {

// Fixed sine/cosine embedding: channel 2i = sin(pos * base^(-2i/dim)),
// channel 2i+1 = cos of the same argument. dim must be even.
std::vector<double> sinusoidal_pe(double pos, std::size_t dim, double base = 10000.0);

}  // namespace streamrope::embeddings
