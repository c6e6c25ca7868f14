// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "streamrope/harness/config.hpp"

namespace streamrope::harness {

struct CheckResult {
  std::string name;
  std::size_t cases = 0;
  double measured = 0.0;   // worst error observed
  double tolerance = 0.0;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string detail;

  bool within_tolerance() const { return measured <= tolerance; }
  bool passed() const { return within_tolerance() && seconds <= time_limit; }
};

// <R(a) q, R(b) k> against the same pair shifted by s along one axis, for
// every axis block of the configured partition. cases_per_block per axis.
CheckResult check_relative_offset(const decoder::DecoderConfig& config,
                                  std::size_t cases_per_block, std::uint64_t seed);

// | ||R(a) v|| - ||v|| | over random vectors and coordinates.
CheckResult check_norm_preservation(const decoder::DecoderConfig& config, std::size_t cases,
                                    std::uint64_t seed);

// R(theta + phi) v against R(phi) R(theta) v.
CheckResult check_rotation_composition(const decoder::DecoderConfig& config, std::size_t cases,
                                       std::uint64_t seed);

// Streams random episodes through a randomly initialized decoder twice, the
// second time with a common per-axis shift of every normalized coordinate.
// Measures detection differences; attention logits must agree within 1e-6.
CheckResult check_shift_invariance(const RunConfig& config, std::size_t episodes,
                                   std::uint64_t seed);

// Central differences (h = 1e-5) over every parameter of a 2-query decoder on a
// 9-token, 2-frame episode, loss summed over both frames.
CheckResult check_gradient_fidelity(const RunConfig& config, std::uint64_t seed);

// Random integer cost matrices up to 6 x 6 against exhaustive search.
CheckResult check_matcher_optimality(std::size_t cases, std::uint64_t seed);

// All of the above at their standard sizes.
std::vector<CheckResult> run_check_suite(const RunConfig& config, std::uint64_t seed);

}  // namespace streamrope::harness
