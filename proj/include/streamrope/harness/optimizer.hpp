// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "streamrope/numerics/tape.hpp"

namespace streamrope::harness {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment optimizer over every parameter of a store, with bias
// correction. Moment buffers follow store order.
class Adam {
 public:
  Adam(numerics::ParameterStore& store, AdamConfig config = {});

  void step(double lr);
  std::size_t steps_taken() const { return step_; }

 private:
  numerics::ParameterStore* store_;
  AdamConfig config_;
  std::vector<numerics::DenseMatrix> m_;
  std::vector<numerics::DenseMatrix> v_;
  std::size_t step_ = 0;
};

// lr_final + (lr - lr_final) * (1 + cos(pi * step / (total - 1))) / 2, so the
// first step uses lr and the last uses lr_final.
double cosine_lr(double lr, double lr_final, std::size_t step, std::size_t total_steps);

}  // namespace streamrope::harness
