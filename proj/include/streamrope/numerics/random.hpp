// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>

namespace streamrope::numerics {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Counter-based generator: draw n of a stream is a pure function of
// (key, n), so any (episode, frame, purpose) stream can be reproduced without
// replaying its siblings. Child streams are derived by hashing a tag into the key.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {});

  CounterRng split(std::uint64_t tag) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; consumes two draws per call.
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace streamrope::numerics
