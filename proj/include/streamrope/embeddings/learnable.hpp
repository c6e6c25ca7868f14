// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "streamrope/embeddings/coords.hpp"
#include "streamrope/numerics/random.hpp"
#include "streamrope/numerics/tape.hpp"

namespace streamrope::embeddings {

// Trainable embedding table, one row per discrete position. The rows live in
// a ParameterStore so the optimizer updates them with everything else.
class LearnablePositionTable {
 public:
  LearnablePositionTable(numerics::ParameterStore& store, std::string name,
                         std::size_t max_positions, std::size_t dim, numerics::CounterRng rng,
                         double init_std = 0.02);
  // Wraps a parameter that already holds a table.
  explicit LearnablePositionTable(numerics::Parameter& existing) : param_(&existing) {}

  std::size_t max_positions() const { return param_->value.rows(); }
  std::size_t dim() const { return param_->value.cols(); }
  numerics::Parameter& parameter() const { return *param_; }

 private:
  numerics::Parameter* param_;
};

std::vector<double> lookup_learnable(const LearnablePositionTable& table, std::size_t index);
// Rows `indices` of the table as an n x dim tape value; gradients flow back
// into the table parameter.
numerics::Var lookup_learnable(numerics::Tape& tape, const LearnablePositionTable& table,
                               std::span<const std::size_t> indices);

// Quantizers mapping continuous normalized coordinates onto table rows.
std::size_t spatial_cell_index(const SpatioTemporalCoord& c, std::size_t grid);
std::size_t temporal_index(double t_norm, std::size_t window);

}  // namespace streamrope::embeddings
