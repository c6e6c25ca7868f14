// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "streamrope/numerics/dense_matrix.hpp"

namespace streamrope::harness {

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), sorted by row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

// Minimum-cost assignment of min(rows, cols) pairs. Among optimal assignments
// the one whose sorted pair list is lexicographically smallest is returned.
// Throws NumericalError on non-finite costs.
MatchResult hungarian_match(const numerics::DenseMatrix& cost);

// Optimal total cost only (no tie-breaking work).
double min_assignment_cost(const numerics::DenseMatrix& cost);

}  // namespace streamrope::harness
