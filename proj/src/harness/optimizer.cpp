// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/optimizer.hpp"

#include <cmath>
#include <numbers>

namespace streamrope::harness {

Adam::Adam(numerics::ParameterStore& store, AdamConfig config)
    : store_(&store), config_(config) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    m_.emplace_back(store[i].value.rows(), store[i].value.cols());
    v_.emplace_back(store[i].value.rows(), store[i].value.cols());
  }
}

void Adam::step(double lr) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < store_->size(); ++i) {
    numerics::Parameter& p = (*store_)[i];
    auto w = p.value.values();
    const auto g = p.grad.values();
    auto m = m_[i].values();
    auto v = v_[i].values();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      w[k] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

double cosine_lr(double lr, double lr_final, std::size_t step, std::size_t total_steps) {
  if (total_steps <= 1) return lr;
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps - 1);
  return lr_final + 0.5 * (lr - lr_final) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace streamrope::harness
