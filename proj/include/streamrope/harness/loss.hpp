// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "streamrope/harness/matching.hpp"
#include "streamrope/numerics/tape.hpp"
#include "streamrope/scenes/scenes.hpp"

namespace streamrope::harness {

struct LossWeights {
  double center = 1.0;
  double velocity = 1.0;
  double cls = 2.0;
};

struct LossResult {
  numerics::Var loss;  // 1 x 1
  MatchResult match;   // rows: predictions, cols: ground truth
};

// Matching cost per (prediction, object):
//   w.center * L1(center) + w.velocity * L1(velocity) + w.cls * (1 - class_prob)
// Loss after the optimal match:
//   w.center * sum L1(center) / n_gt + w.velocity * sum L1(velocity) / n_gt
//   + w.cls * mean BCE(class logit, matched ? 1 : 0)
// With no objects only the classification term remains.
LossResult detection_loss(numerics::Var centers, numerics::Var velocities,
                          numerics::Var class_logits, std::span<const scenes::GtObject> objects,
                          const LossWeights& weights);

}  // namespace streamrope::harness
