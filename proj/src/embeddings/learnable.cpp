// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/embeddings/learnable.hpp"

#include <algorithm>
#include <cmath>

#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/ops.hpp"

namespace streamrope::embeddings {

LearnablePositionTable::LearnablePositionTable(numerics::ParameterStore& store,
                                               std::string name, std::size_t max_positions,
                                               std::size_t dim, numerics::CounterRng rng,
                                               double init_std) {
  if (max_positions == 0 || dim == 0) throw ConfigurationError("empty learnable table");
  numerics::DenseMatrix init(max_positions, dim);
  for (double& v : init.values()) v = init_std * rng.normal();
  param_ = &store.create(std::move(name), std::move(init));
}

std::vector<double> lookup_learnable(const LearnablePositionTable& table, std::size_t index) {
  if (index >= table.max_positions()) {
    throw ConfigurationError("lookup_learnable: index " + std::to_string(index) +
                             " >= max_positions " + std::to_string(table.max_positions()));
  }
  const auto row = table.parameter().value.row(index);
  return {row.begin(), row.end()};
}

numerics::Var lookup_learnable(numerics::Tape& tape, const LearnablePositionTable& table,
                               std::span<const std::size_t> indices) {
  for (std::size_t i : indices) {
    if (i >= table.max_positions()) {
      throw ConfigurationError("lookup_learnable: index " + std::to_string(i) +
                               " >= max_positions " + std::to_string(table.max_positions()));
    }
  }
  return numerics::gather_rows(tape.param(table.parameter()), indices);
}

std::size_t spatial_cell_index(const SpatioTemporalCoord& c, std::size_t grid) {
  auto cell = [grid](double v) {
    const auto i = static_cast<std::size_t>(std::floor(std::clamp(v, 0.0, 1.0) * grid));
    return std::min(i, grid - 1);
  };
  return cell(c.y) * grid + cell(c.x);
}

std::size_t temporal_index(double t_norm, std::size_t window) {
  const auto i = static_cast<std::size_t>(std::lround(std::clamp(t_norm, 0.0, 1.0) * window));
  return std::min(i, window);
}

}  // namespace streamrope::embeddings
