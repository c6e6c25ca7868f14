// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/numerics/random.hpp"

#include <cmath>
#include <numbers>

namespace streamrope::numerics {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    : key_(mix64(seed)) {
  for (std::uint64_t tag : path) key_ = mix64(key_ ^ mix64(tag + 0x632BE59BD9B4E019ULL));
}

CounterRng CounterRng::split(std::uint64_t tag) const {
  CounterRng child(0);
  child.key_ = mix64(key_ ^ mix64(tag + 0x632BE59BD9B4E019ULL));
  return child;
}

std::uint64_t CounterRng::next_u64() { return mix64(key_ ^ mix64(counter_++)); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace streamrope::numerics
