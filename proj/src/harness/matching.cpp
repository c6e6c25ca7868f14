// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::harness {

using numerics::DenseMatrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest augmenting path with potentials, O(n^2 m), for n <= m. Writes the
// column assigned to each row and returns the total cost.
double solve_rows_le_cols(const DenseMatrix& c, std::vector<std::size_t>* row_to_col) {
  const std::size_t n = c.rows();
  const std::size_t m = c.cols();
  // 1-based: index 0 is the virtual source row/column.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  row_to_col->assign(n, 0);
  double total = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) {
      (*row_to_col)[p[j] - 1] = j - 1;
    }
  }
  // Summed in row order so equal assignments give bitwise-equal totals.
  for (std::size_t i = 0; i < n; ++i) total += c(i, (*row_to_col)[i]);
  return total;
}

double optimal_cost(const DenseMatrix& c) {
  if (c.rows() == 0 || c.cols() == 0) return 0.0;
  std::vector<std::size_t> assign;
  if (c.rows() <= c.cols()) return solve_rows_le_cols(c, &assign);
  return solve_rows_le_cols(numerics::transpose(c), &assign);
}

DenseMatrix submatrix(const DenseMatrix& c, const std::vector<std::size_t>& rows,
                      const std::vector<std::size_t>& cols) {
  DenseMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = c(rows[i], cols[j]);
  return out;
}

bool same_cost(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

void check_finite(const DenseMatrix& cost) {
  if (!cost.all_finite()) throw NumericalError("hungarian_match: cost matrix has non-finite entries");
}

}  // namespace

double min_assignment_cost(const DenseMatrix& cost) {
  check_finite(cost);
  return optimal_cost(cost);
}

MatchResult hungarian_match(const DenseMatrix& cost) {
  check_finite(cost);
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  MatchResult result;
  const double best = optimal_cost(cost);

  // Fix rows in order, each to its smallest column (or to "unmatched") that
  // still admits an optimal completion.
  std::vector<std::size_t> free_cols(m);
  for (std::size_t j = 0; j < m; ++j) free_cols[j] = j;
  std::size_t needed = std::min(n, m);
  double committed = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::size_t> later_rows;
    for (std::size_t i = r + 1; i < n; ++i) later_rows.push_back(i);

    bool placed = false;
    if (needed > 0) {
      for (std::size_t k = 0; k < free_cols.size(); ++k) {
        const std::size_t col = free_cols[k];
        std::vector<std::size_t> rest_cols = free_cols;
        rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(k));
        if (std::min(later_rows.size(), rest_cols.size()) != needed - 1) continue;
        const double completion = optimal_cost(submatrix(cost, later_rows, rest_cols));
        if (same_cost(committed + cost(r, col) + completion, best)) {
          result.pairs.emplace_back(r, col);
          committed += cost(r, col);
          free_cols = std::move(rest_cols);
          --needed;
          placed = true;
          break;
        }
      }
    }
    if (!placed) result.unmatched_rows.push_back(r);
  }
  result.unmatched_cols = free_cols;
  if (result.pairs.size() != std::min(n, m)) {
    // Tolerance mismatch in the tie-breaking pass; use the solver's own assignment.
    result = MatchResult{};
    std::vector<std::size_t> assign;
    const bool transposed = n > m;
    solve_rows_le_cols(transposed ? numerics::transpose(cost) : cost, &assign);
    std::vector<char> row_used(n, 0), col_used(m, 0);
    for (std::size_t i = 0; i < assign.size(); ++i) {
      const std::size_t r = transposed ? assign[i] : i;
      const std::size_t c = transposed ? i : assign[i];
      result.pairs.emplace_back(r, c);
      row_used[r] = col_used[c] = 1;
    }
    std::sort(result.pairs.begin(), result.pairs.end());
    for (std::size_t r = 0; r < n; ++r)
      if (!row_used[r]) result.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < m; ++c)
      if (!col_used[c]) result.unmatched_cols.push_back(c);
  }
  result.total_cost = 0.0;
  for (const auto& [r, c] : result.pairs) result.total_cost += cost(r, c);
  return result;
}

}  // namespace streamrope::harness
