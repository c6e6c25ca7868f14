// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "streamrope/decoder/decoder.hpp"
#include "streamrope/harness/config.hpp"
#include "streamrope/scenes/scenes.hpp"

namespace streamrope::harness {

inline constexpr double kUndefinedMetric = -1.0;

// Errors are Euclidean norms averaged over matched pairs; kUndefinedMetric
// when nothing matched. Precision is 0 when nothing was predicted.
struct Metrics {
  double center_mae = kUndefinedMetric;
  double velocity_mae = kUndefinedMetric;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t matches = 0;
  std::size_t predictions = 0;
  std::size_t ground_truth = 0;

  bool operator==(const Metrics&) const = default;
};

// Detections for every frame of an episode, in frame order.
using Predictor =
    std::function<std::vector<std::vector<decoder::Detection>>(const scenes::Episode&)>;

Predictor decoder_predictor(const decoder::StreamingDecoder& model);
// Returns the ground truth itself with class_prob 1.
Predictor oracle_predictor();

// Frame 0 of every episode is skipped. Per frame, detections with
// class_prob >= class_threshold are matched to objects by Hungarian
// assignment on center distance and pairs farther than match_radius apart
// are discarded.
Metrics evaluate_predictor(const Predictor& predictor, std::span<const scenes::Episode> episodes,
                           double class_threshold, double match_radius);

// Evaluates on the run's evaluation episodes.
Metrics evaluate(const decoder::StreamingDecoder& model, const RunConfig& config);

}  // namespace streamrope::harness
