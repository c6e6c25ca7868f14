// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/loss.hpp"

#include <cmath>

#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/ops.hpp"

namespace streamrope::harness {

using numerics::DenseMatrix;
using numerics::Var;

LossResult detection_loss(Var centers, Var velocities, Var class_logits,
                          std::span<const scenes::GtObject> objects, const LossWeights& weights) {
  const std::size_t n = centers.rows();
  if (centers.cols() != 2 || velocities.rows() != n || velocities.cols() != 2 ||
      class_logits.rows() != n || class_logits.cols() != 1) {
    throw ConfigurationError("detection_loss: expected n x 2 centers/velocities and n x 1 logits");
  }
  const DenseMatrix& c = centers.value();
  const DenseMatrix& v = velocities.value();
  const DenseMatrix& z = class_logits.value();
  const std::size_t g = objects.size();

  LossResult out;
  DenseMatrix cost(n, g);
  for (std::size_t i = 0; i < n; ++i) {
    const double prob = 1.0 / (1.0 + std::exp(-z(i, 0)));
    for (std::size_t j = 0; j < g; ++j) {
      const auto& o = objects[j];
      const double l1c = std::abs(c(i, 0) - o.center.x) + std::abs(c(i, 1) - o.center.y);
      const double l1v = std::abs(v(i, 0) - o.velocity.x) + std::abs(v(i, 1) - o.velocity.y);
      cost(i, j) = weights.center * l1c + weights.velocity * l1v + weights.cls * (1.0 - prob);
    }
  }
  if (g > 0) out.match = hungarian_match(cost);
  else {
    for (std::size_t i = 0; i < n; ++i) out.match.unmatched_rows.push_back(i);
  }

  DenseMatrix targets(n, 1);
  for (const auto& [i, j] : out.match.pairs) targets(i, 0) = 1.0;
  Var loss = numerics::scale(numerics::mean(numerics::bce_with_logits(class_logits, targets)),
                             weights.cls);

  if (!out.match.pairs.empty()) {
    std::vector<std::size_t> rows;
    DenseMatrix gt_c(out.match.pairs.size(), 2), gt_v(out.match.pairs.size(), 2);
    for (std::size_t k = 0; k < out.match.pairs.size(); ++k) {
      const auto& [i, j] = out.match.pairs[k];
      rows.push_back(i);
      gt_c(k, 0) = objects[j].center.x;
      gt_c(k, 1) = objects[j].center.y;
      gt_v(k, 0) = objects[j].velocity.x;
      gt_v(k, 1) = objects[j].velocity.y;
    }
    numerics::Tape& t = centers.tape();
    const double inv_gt = 1.0 / static_cast<double>(g);
    const Var center_l1 = numerics::sum(
        numerics::abs(numerics::sub(numerics::gather_rows(centers, rows), t.constant(gt_c))));
    const Var velocity_l1 = numerics::sum(
        numerics::abs(numerics::sub(numerics::gather_rows(velocities, rows), t.constant(gt_v))));
    loss = numerics::add(loss, numerics::scale(center_l1, weights.center * inv_gt));
    loss = numerics::add(loss, numerics::scale(velocity_l1, weights.velocity * inv_gt));
  }
  out.loss = loss;
  return out;
}

}  // namespace streamrope::harness
