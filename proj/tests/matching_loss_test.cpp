// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "streamrope/harness/loss.hpp"
#include "streamrope/harness/matching.hpp"
#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/grad_check.hpp"
#include "streamrope/numerics/random.hpp"

namespace streamrope::harness {
namespace {

using numerics::DenseMatrix;
using numerics::Tape;
using scenes::GtObject;

// Exhaustive search: minimum cost and the lexicographically smallest optimal
// pair list.
struct BruteForce {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

BruteForce brute_force(const DenseMatrix& c) {
  const bool flip = c.rows() > c.cols();
  const std::size_t small = std::min(c.rows(), c.cols());
  const std::size_t large = std::max(c.rows(), c.cols());
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  BruteForce best;
  do {
    double total = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < small; ++i) {
      const auto pr = flip ? std::make_pair(perm[i], i) : std::make_pair(i, perm[i]);
      total += c(pr.first, pr.second);
      pairs.push_back(pr);
    }
    std::sort(pairs.begin(), pairs.end());
    if (total < best.cost || (total == best.cost && pairs < best.pairs)) {
      best.cost = total;
      best.pairs = pairs;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(Hungarian, OneByOne) {
  const MatchResult m = hungarian_match(DenseMatrix{{4.2}});
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0], std::make_pair(std::size_t{0}, std::size_t{0}));
  EXPECT_EQ(m.total_cost, 4.2);
}

TEST(Hungarian, DiagonalDominance) {
  const MatchResult m = hungarian_match(DenseMatrix{{1, 2}, {2, 1}});
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{0, 0}, {1, 1}};
  EXPECT_EQ(m.pairs, expected);
  EXPECT_EQ(m.total_cost, 2.0);
}

TEST(Hungarian, RandomFiveByFive) {
  numerics::CounterRng rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    DenseMatrix c(5, 5);
    for (double& v : c.values()) v = static_cast<double>(rng.next_u64() % 10);
    EXPECT_EQ(hungarian_match(c).total_cost, brute_force(c).cost);
  }
}

TEST(Hungarian, PropertyUpToSixBySix) {
  numerics::CounterRng rng(56);
  for (int trial = 0; trial < 1500; ++trial) {
    const auto rows = 1 + rng.next_u64() % 6;
    const auto cols = 1 + rng.next_u64() % 6;
    DenseMatrix c(rows, cols);
    // Small integer range forces many ties.
    for (double& v : c.values()) v = static_cast<double>(rng.next_u64() % 4);
    const MatchResult m = hungarian_match(c);
    const BruteForce want = brute_force(c);
    ASSERT_EQ(m.total_cost, want.cost);
    ASSERT_EQ(m.pairs, want.pairs) << "tie-break differs at trial " << trial;
    EXPECT_EQ(m.unmatched_rows.size(), rows - m.pairs.size());
    EXPECT_EQ(m.unmatched_cols.size(), cols - m.pairs.size());
  }
}

TEST(Hungarian, RealValuedCosts) {
  numerics::CounterRng rng(57);
  for (int trial = 0; trial < 300; ++trial) {
    DenseMatrix c(1 + rng.next_u64() % 6, 1 + rng.next_u64() % 6);
    for (double& v : c.values()) v = rng.uniform(-5.0, 5.0);
    EXPECT_NEAR(hungarian_match(c).total_cost, brute_force(c).cost, 1e-12);
    EXPECT_NEAR(min_assignment_cost(c), brute_force(c).cost, 1e-12);
  }
}

TEST(Hungarian, RectangularLeavesUnmatched) {
  const MatchResult wide = hungarian_match(DenseMatrix{{5, 1, 3}});
  ASSERT_EQ(wide.pairs.size(), 1u);
  EXPECT_EQ(wide.pairs[0].second, 1u);
  EXPECT_EQ(wide.unmatched_cols, (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(wide.unmatched_rows.empty());
  const MatchResult tall = hungarian_match(DenseMatrix{{5}, {1}, {3}});
  EXPECT_EQ(tall.pairs[0].first, 1u);
  EXPECT_EQ(tall.unmatched_rows, (std::vector<std::size_t>{0, 2}));
}

TEST(Hungarian, AllEqualCostsPickLexicographicallySmallest) {
  const MatchResult m = hungarian_match(DenseMatrix(3, 4, 1.0));
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{0, 0}, {1, 1}, {2, 2}};
  EXPECT_EQ(m.pairs, expected);
}

TEST(Hungarian, NonFiniteCostThrows) {
  EXPECT_THROW(hungarian_match(DenseMatrix{{1, std::nan("")}}), NumericalError);
  EXPECT_THROW(hungarian_match(DenseMatrix{{std::numeric_limits<double>::infinity()}}),
               NumericalError);
}

struct Predictions {
  DenseMatrix centers;
  DenseMatrix velocities;
  DenseMatrix logits;
};

double loss_value(const Predictions& p, const std::vector<GtObject>& gt, LossWeights w = {}) {
  Tape tape;
  return detection_loss(tape.constant(p.centers), tape.constant(p.velocities),
                        tape.constant(p.logits), gt, w)
      .loss.scalar();
}

double bce(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

TEST(Loss, PerfectPredictionsNearZero) {
  const std::vector<GtObject> gt{{{1, 2}, {0.5, -1}, 1}, {{-7, 3}, {2, 0}, 1}};
  const double logit = std::log((1 - 1e-9) / 1e-9);
  const Predictions p{DenseMatrix{{-7, 3}, {1, 2}}, DenseMatrix{{2, 0}, {0.5, -1}},
                      DenseMatrix{{logit}, {logit}}};
  EXPECT_LT(loss_value(p, gt), 1e-6);
}

TEST(Loss, ZeroHeadsQueryOnObject) {
  const std::vector<GtObject> gt{{{-37.5, -37.5}, {0, 0}, 1}};
  const Predictions p{DenseMatrix{{-37.5, -37.5}, {-12.5, -37.5}, {12.5, -37.5}},
                      DenseMatrix(3, 2), DenseMatrix(3, 1)};
  Tape tape;
  const LossResult r = detection_loss(tape.constant(p.centers), tape.constant(p.velocities),
                                      tape.constant(p.logits), gt, LossWeights{});
  ASSERT_EQ(r.match.pairs.size(), 1u);
  EXPECT_EQ(r.match.pairs[0], std::make_pair(std::size_t{0}, std::size_t{0}));
  // Only the classification term remains: 2 * mean BCE at logit 0.
  EXPECT_NEAR(r.loss.scalar(), 2.0 * std::log(2.0), 1e-15);
}

TEST(Loss, UsesOptimalNotGreedyAssignment) {
  // Greedy takes (0,0) at 0.5 and is left with (1,1) at 2.5; optimal is 1 + 1.
  const std::vector<GtObject> gt{{{0, 0}, {0, 0}, 1}, {{1.5, 0}, {0, 0}, 1}};
  const Predictions p{DenseMatrix{{0.5, 0}, {-1, 0}}, DenseMatrix(2, 2), DenseMatrix(2, 1)};
  DenseMatrix cost(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      cost(i, j) = std::abs(p.centers(i, 0) - gt[j].center.x) + 2.0 * 0.5;
  const BruteForce best = brute_force(cost);
  const std::vector<std::pair<std::size_t, std::size_t>> optimal{{0, 1}, {1, 0}};
  ASSERT_EQ(best.pairs, optimal);
  const LossWeights center_only{1.0, 0.0, 0.0};
  EXPECT_NEAR(loss_value(p, gt, center_only), (1.0 + 1.0) / 2.0, 1e-15);
}

TEST(Loss, ClosedFormWithUnmatchedPredictions) {
  const std::vector<GtObject> gt{{{2, 0}, {1, 1}, 1}};
  const Predictions p{DenseMatrix{{2.5, -0.5}, {30, 30}}, DenseMatrix{{0.5, 2}, {0, 0}},
                      DenseMatrix{{0.3}, {-1.2}}};
  const double center = 0.5 + 0.5;
  const double velocity = 0.5 + 1.0;
  const double cls = (bce(0.3, 1.0) + bce(-1.2, 0.0)) / 2.0;
  EXPECT_NEAR(loss_value(p, gt), center + velocity + 2.0 * cls, 1e-14);
}

TEST(Loss, NoObjectsIsClassificationOnly) {
  const Predictions p{DenseMatrix{{1, 1}, {2, 2}}, DenseMatrix{{1, 0}, {0, 1}},
                      DenseMatrix{{0.7}, {-0.4}}};
  EXPECT_NEAR(loss_value(p, {}), 2.0 * (bce(0.7, 0) + bce(-0.4, 0)) / 2.0, 1e-15);
}

TEST(Loss, PermutationInvariant) {
  numerics::CounterRng rng(60);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5;
    const std::size_t m = 3;
    Predictions p{DenseMatrix(n, 2), DenseMatrix(n, 2), DenseMatrix(n, 1)};
    for (auto* mat : {&p.centers, &p.velocities, &p.logits})
      for (double& v : mat->values()) v = rng.uniform(-5, 5);
    std::vector<GtObject> gt;
    for (std::size_t j = 0; j < m; ++j)
      gt.push_back({{rng.uniform(-5, 5), rng.uniform(-5, 5)}, {rng.uniform(-2, 2), 0.25}, 1});
    const double base = loss_value(p, gt);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::reverse(order.begin(), order.end());
    std::rotate(order.begin(), order.begin() + 2, order.end());
    Predictions q{DenseMatrix(n, 2), DenseMatrix(n, 2), DenseMatrix(n, 1)};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 2; ++c) {
        q.centers(i, c) = p.centers(order[i], c);
        q.velocities(i, c) = p.velocities(order[i], c);
      }
      q.logits(i, 0) = p.logits(order[i], 0);
    }
    std::vector<GtObject> gt_rev(gt.rbegin(), gt.rend());
    EXPECT_NEAR(loss_value(q, gt), base, 1e-12);
    EXPECT_NEAR(loss_value(p, gt_rev), base, 1e-12);
    EXPECT_NEAR(loss_value(q, gt_rev), base, 1e-12);
  }
}

TEST(Loss, GradientsMatchCentralDifferences) {
  numerics::ParameterStore store;
  auto& c = store.create("c", DenseMatrix{{0.3, -1.1}, {2.2, 0.4}, {-3, 1}});
  auto& v = store.create("v", DenseMatrix{{0.1, 0.2}, {-0.7, 1.3}, {0.9, -0.3}});
  auto& l = store.create("l", DenseMatrix{{0.2}, {-0.5}, {1.5}});
  const std::vector<GtObject> gt{{{0, -1}, {0.5, 0.5}, 1}, {{2, 1}, {-1, 1}, 1}};
  std::vector<numerics::Parameter*> params = store.all();
  const auto report = numerics::grad_check_central_diff(
      [&](Tape& t) {
        return detection_loss(t.param(c), t.param(v), t.param(l), gt, LossWeights{}).loss;
      },
      params);
  EXPECT_LT(report.max_relative_error, 1e-7);
}

}  // namespace
}  // namespace streamrope::harness
