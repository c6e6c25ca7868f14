// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "streamrope/harness/config.hpp"
#include "streamrope/harness/io.hpp"

namespace streamrope::harness {

// A variant is an embedding mode optionally followed by decoder overrides,
// e.g. "mrope_spatiotemporal;pairs_t=4;pairs_x=2;pairs_y=2;time_scale=16".
// Only decoder keys may be overridden.
RunConfig apply_variant(const RunConfig& base, std::string_view variant);

struct AblationResult {
  // Per variant: one row per seed, then a "mean" row.
  std::vector<MetricsRow> rows;
  // Training episode seeds in step order, per run seed. Every variant
  // consumed exactly this sequence.
  std::vector<std::vector<std::uint64_t>> consumed_seeds;
};

using ProgressFn = std::function<void(const std::string&)>;

// Trains and evaluates every variant for run seeds seed .. seed + seeds - 1
// on shared episode sets. Up to run.threads variants train concurrently.
// Throws std::logic_error if variants consumed different episode sequences.
AblationResult run_ablation(const RunConfig& base, const std::vector<std::string>& variants,
                            const ProgressFn& progress = {});

// Mean over rows: MAEs over rows where they are defined, precision and
// recall averaged, counts summed.
Metrics mean_metrics(const std::vector<Metrics>& rows);

}  // namespace streamrope::harness
