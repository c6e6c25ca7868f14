// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "streamrope/embeddings/coords.hpp"
#include "streamrope/embeddings/learnable.hpp"
#include "streamrope/embeddings/rotary.hpp"
#include "streamrope/embeddings/sinusoidal.hpp"
#include "streamrope/embeddings/spectrum.hpp"
#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/grad_check.hpp"
#include "streamrope/numerics/ops.hpp"
#include "streamrope/numerics/random.hpp"

namespace streamrope::embeddings {
namespace {

using numerics::CounterRng;
using numerics::DenseMatrix;

// Pairwise rotation written out independently of the library.
std::vector<double> rotate_oracle(const std::vector<double>& v, const std::vector<double>& theta) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double c = std::cos(theta[i]);
    const double s = std::sin(theta[i]);
    out[2 * i] = v[2 * i] * c - v[2 * i + 1] * s;
    out[2 * i + 1] = v[2 * i] * s + v[2 * i + 1] * c;
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct DefaultRotary {
  ChannelPartition p{2, 3, 3};
  FrequencySpectrum t{10000.0, 2, 32.0};
  FrequencySpectrum xy{10000.0, 3, 128.0};
};

TEST(Spectrum, GeometricAndDecreasing) {
  const FrequencySpectrum s(10000.0, 12, 128.0);
  EXPECT_EQ(s.frequency(0), 1.0);
  for (std::size_t i = 0; i < s.n_pairs(); ++i) {
    EXPECT_NEAR(s.frequency(i), std::pow(10000.0, -static_cast<double>(i) / 12.0), 1e-15);
    EXPECT_GT(s.frequency(i), 0.0);
    EXPECT_LE(s.frequency(i), 1.0);
    if (i > 0) {
      EXPECT_LT(s.frequency(i), s.frequency(i - 1));
      const double step = std::log(s.frequency(i)) - std::log(s.frequency(i - 1));
      EXPECT_NEAR(step, -std::log(10000.0) / 12.0, 1e-12);
    }
  }
  EXPECT_GE(s.frequency(11), std::pow(10000.0, -1.0) * std::pow(10000.0, 1.0 / 12.0) - 1e-15);
}

TEST(Spectrum, RejectsBadParameters) {
  EXPECT_THROW(FrequencySpectrum(1.0, 4, 128.0), ConfigurationError);
  EXPECT_THROW(FrequencySpectrum(10000.0, 4, 0.0), ConfigurationError);
}

TEST(Partition, Validation) {
  EXPECT_NO_THROW((ChannelPartition{2, 3, 3}.validate(16)));
  EXPECT_NO_THROW((ChannelPartition{0, 4, 4}.validate(16)));
  EXPECT_NO_THROW((ChannelPartition{8, 12, 12}.validate(64)));
  EXPECT_THROW((ChannelPartition{2, 3, 3}.validate(18)), ConfigurationError);
  EXPECT_THROW((ChannelPartition{2, 4, 2}.validate(16)), ConfigurationError);
  EXPECT_THROW((ChannelPartition{1, 3, 3}.validate(15)), ConfigurationError);
  EXPECT_EQ(scaled(ChannelPartition{2, 3, 3}, 4), (ChannelPartition{8, 12, 12}));
}

TEST(Sinusoidal, ZeroPosition) {
  const auto pe = sinusoidal_pe(0.0, 8);
  for (std::size_t i = 0; i < pe.size(); ++i) EXPECT_EQ(pe[i], i % 2 == 0 ? 0.0 : 1.0);
}

TEST(Sinusoidal, UnitPositionClosedForm) {
  const auto pe = sinusoidal_pe(1.0, 4, 10000.0);
  EXPECT_NEAR(pe[0], std::sin(1.0), 1e-12);
  EXPECT_NEAR(pe[1], std::cos(1.0), 1e-12);
  EXPECT_NEAR(pe[2], std::sin(0.01), 1e-12);
  EXPECT_NEAR(pe[3], std::cos(0.01), 1e-12);
  EXPECT_NEAR(pe[0], 0.841471, 1e-6);
  EXPECT_NEAR(pe[1], 0.540302, 1e-6);
  EXPECT_NEAR(pe[2], 0.010000, 1e-6);
  EXPECT_NEAR(pe[3], 0.999950, 1e-6);
}

TEST(Sinusoidal, Periodicity) {
  const double pos = std::numbers::pi * std::pow(10000.0, 2.0 / 4.0);
  EXPECT_NEAR(sinusoidal_pe(pos, 4, 10000.0)[2], 0.0, 1e-9);
}

TEST(Sinusoidal, OddDimensionThrows) { EXPECT_THROW(sinusoidal_pe(1.0, 7), ConfigurationError); }

TEST(Sinusoidal, BoundedAndDistinct) {
  std::vector<std::vector<double>> table;
  for (int p = 0; p < 256; ++p) {
    table.push_back(sinusoidal_pe(p, 16));
    for (double v : table.back()) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = i + 1; j < table.size(); ++j) {
      double diff = 0.0;
      for (std::size_t k = 0; k < 16; ++k) diff = std::max(diff, std::abs(table[i][k] - table[j][k]));
      EXPECT_GT(diff, 1e-9) << i << " vs " << j;
    }
}

TEST(Normalize, Bev) {
  EXPECT_EQ(normalize_bev(0, 0, 50), std::make_pair(0.5, 0.5));
  EXPECT_EQ(normalize_bev(-50, 50, 50), std::make_pair(0.0, 1.0));
  const auto [x, y] = normalize_bev(25, -10, 50);
  EXPECT_NEAR(x, 0.75, 1e-15);
  EXPECT_NEAR(y, 0.4, 1e-15);
  EXPECT_EQ(normalize_bev(80, -70, 50), std::make_pair(1.0, 0.0));
}

TEST(Normalize, Time) {
  EXPECT_EQ(normalize_time(0, 8), 0.0);
  EXPECT_EQ(normalize_time(8, 8), 1.0);
  EXPECT_EQ(normalize_time(3, 8), 0.375);
  EXPECT_EQ(normalize_time(12, 8), 1.0);
}

TEST(Normalize, DifferentiablePointsMatchScalarPath) {
  CoordNormalizer n;
  numerics::Tape tape;
  const DenseMatrix xy{{25, -10}, {-60, 3}};
  const std::int64_t frames[] = {3, 5};
  const DenseMatrix c = n.coords(tape.constant(xy), frames).value();
  for (std::size_t r = 0; r < 2; ++r) {
    const auto s = n.normalize({xy(r, 0), xy(r, 1)}, frames[r]);
    EXPECT_EQ(c(r, 0), s.t);
    EXPECT_EQ(c(r, 1), s.x);
    EXPECT_EQ(c(r, 2), s.y);
  }
}

TEST(MropeAngles, ZeroCoordinate) {
  const DefaultRotary s;
  const auto a = mrope_angles({0, 0, 0}, s.p, s.t, s.xy);
  ASSERT_EQ(a.angles.size(), 8u);
  for (double v : a.angles) EXPECT_EQ(v, 0.0);
}

TEST(MropeAngles, UnitCoordinateLeadingAngles) {
  const ChannelPartition p{8, 12, 12};
  const FrequencySpectrum t(10000.0, 8, 128.0);
  const FrequencySpectrum xy(10000.0, 12, 128.0);
  const auto a = mrope_angles({1, 1, 1}, p, t, xy);
  EXPECT_EQ(a.t_block()[0], 128.0);
  EXPECT_EQ(a.x_block()[0], 128.0);
  EXPECT_EQ(a.y_block()[0], 128.0);
}

TEST(MropeAngles, BlockLayout) {
  const DefaultRotary s;
  const SpatioTemporalCoord c{0.3, 0.7, 0.25};
  const auto a = mrope_angles(c, s.p, s.t, s.xy);
  ASSERT_EQ(a.angles.size(), s.p.total_pairs());
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(a.t_block()[i], 0.25 * 32.0 * s.t.frequency(i), 1e-15);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(a.x_block()[i], 0.3 * 128.0 * s.xy.frequency(i), 1e-13);
    EXPECT_NEAR(a.y_block()[i], 0.7 * 128.0 * s.xy.frequency(i), 1e-13);
  }
  EXPECT_EQ(a.t_block().size() + a.x_block().size() + a.y_block().size(), a.angles.size());
  EXPECT_EQ(a.x_block().data(), a.t_block().data() + a.t_block().size());
  EXPECT_EQ(a.y_block().data(), a.x_block().data() + a.x_block().size());
}

TEST(MropeAngles, SpatialOnlyPartition) {
  const ChannelPartition p{0, 4, 4};
  const FrequencySpectrum t(10000.0, 0, 32.0);
  const FrequencySpectrum xy(10000.0, 4, 128.0);
  const auto a = mrope_angles({0.5, 0.5, 0.9}, p, t, xy);
  EXPECT_EQ(a.angles.size(), 8u);
  EXPECT_TRUE(a.t_block().empty());
  EXPECT_EQ(a.x_block()[0], 64.0);
}

TEST(MropeAngles, MismatchedSpectrumThrows) {
  const DefaultRotary s;
  const FrequencySpectrum wrong(10000.0, 4, 128.0);
  EXPECT_THROW(mrope_angles({0, 0, 0}, s.p, s.t, wrong), ConfigurationError);
  EXPECT_THROW(mrope_angles({0, 0, 0}, s.p, wrong, s.xy), ConfigurationError);
}

TEST(Rotation, ZeroAnglesIsIdentity) {
  const std::vector<double> v{1.5, -2, 0.25, 7};
  const std::vector<double> zero(2, 0.0);
  EXPECT_EQ(apply_rotation(v, zero), v);
}

TEST(Rotation, QuarterTurn) {
  const std::vector<double> v{1, 0};
  const std::vector<double> theta{std::numbers::pi / 2};
  const auto out = apply_rotation(v, theta);
  EXPECT_NEAR(out[0], 0.0, 1e-12);
  EXPECT_NEAR(out[1], 1.0, 1e-12);
}

TEST(Rotation, LengthMismatchThrows) {
  const std::vector<double> v{1, 2, 3};
  const std::vector<double> theta{0.1};
  EXPECT_THROW(apply_rotation(v, theta), ConfigurationError);
}

TEST(Rotation, MatchesPairwiseOracle) {
  CounterRng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(16);
    std::vector<double> theta(8);
    for (double& x : v) x = rng.normal();
    for (double& x : theta) x = rng.uniform(-200.0, 200.0);
    const auto got = apply_rotation(v, theta);
    const auto want = rotate_oracle(v, theta);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(Rotation, NormAndComposition) {
  CounterRng rng(32);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(16);
    std::vector<double> a(8);
    std::vector<double> b(8);
    std::vector<double> ab(8);
    for (double& x : v) x = rng.normal();
    for (std::size_t i = 0; i < 8; ++i) {
      a[i] = rng.uniform(-128.0, 128.0);
      b[i] = rng.uniform(-128.0, 128.0);
      ab[i] = a[i] + b[i];
    }
    const auto r = apply_rotation(v, a);
    EXPECT_NEAR(std::sqrt(dot(r, r)), std::sqrt(dot(v, v)), 1e-12);
    const auto once = apply_rotation(v, ab);
    const auto twice = apply_rotation(r, b);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(once[i], twice[i], 1e-9);
  }
}

// <R(a) q, R(b) k> depends on a - b only, separately for each axis.
TEST(Rotation, RelativeOffsetPerAxis) {
  const DefaultRotary s;
  CounterRng rng(33);
  for (int axis = 0; axis < 3; ++axis) {
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> q(16);
      std::vector<double> k(16);
      for (double& x : q) x = rng.normal();
      for (double& x : k) x = rng.normal();
      SpatioTemporalCoord a{rng.uniform(), rng.uniform(), rng.uniform()};
      SpatioTemporalCoord b{rng.uniform(), rng.uniform(), rng.uniform()};
      const double shift = rng.uniform(-0.5, 0.5);
      SpatioTemporalCoord as = a;
      SpatioTemporalCoord bs = b;
      double* fields[3][2] = {{&as.t, &bs.t}, {&as.x, &bs.x}, {&as.y, &bs.y}};
      *fields[axis][0] += shift;
      *fields[axis][1] += shift;
      const double before =
          dot(apply_rotation(q, mrope_angles(a, s.p, s.t, s.xy)),
              apply_rotation(k, mrope_angles(b, s.p, s.t, s.xy)));
      const double after =
          dot(apply_rotation(q, mrope_angles(as, s.p, s.t, s.xy)),
              apply_rotation(k, mrope_angles(bs, s.p, s.t, s.xy)));
      EXPECT_NEAR(before, after, 1e-6);
    }
  }
}

TEST(AngleProjection, MatchesScalarAngles) {
  const DefaultRotary s;
  const AngleProjection proj(s.p, s.t, s.xy);
  EXPECT_EQ(proj.pairs(), 8u);
  const DenseMatrix coords{{0.25, 0.3, 0.7}, {1.0, 0.0, 0.5}};
  const DenseMatrix angles = proj.angles(coords);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto a = mrope_angles({coords(r, 1), coords(r, 2), coords(r, 0)}, s.p, s.t, s.xy);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(angles(r, i), a.angles[i], 1e-13);
  }
}

TEST(RotatePairs, MatchesPerHeadRotationAndGradients) {
  CounterRng rng(34);
  numerics::ParameterStore store;
  DenseMatrix x0(3, 32);
  for (double& v : x0.values()) v = rng.normal();
  DenseMatrix th0(3, 8);
  for (double& v : th0.values()) v = rng.uniform(-3.0, 3.0);
  numerics::Parameter& x = store.create("x", x0);
  numerics::Parameter& th = store.create("theta", th0);

  numerics::Tape tape;
  const DenseMatrix out = rotate_pairs(tape.param(x), tape.param(th)).value();
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t h = 0; h < 2; ++h) {
      const std::vector<double> v(x0.row(r).begin() + 16 * h, x0.row(r).begin() + 16 * (h + 1));
      const std::vector<double> theta(th0.row(r).begin(), th0.row(r).end());
      const auto want = rotate_oracle(v, theta);
      for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(out(r, 16 * h + i), want[i], 1e-12);
    }

  DenseMatrix w(3, 32);
  for (double& v : w.values()) v = rng.normal();
  numerics::Parameter* params[] = {&x, &th};
  const auto report = numerics::grad_check_central_diff(
      [&](numerics::Tape& t) {
        return numerics::sum(
            numerics::hadamard(rotate_pairs(t.param(x), t.param(th)), t.constant(w)));
      },
      params);
  EXPECT_LT(report.max_relative_error, 1e-7);
}

TEST(Learnable, DeterministicInitialization) {
  numerics::ParameterStore s1;
  numerics::ParameterStore s2;
  const LearnablePositionTable a(s1, "pos", 10, 4, CounterRng(7));
  const LearnablePositionTable b(s2, "pos", 10, 4, CounterRng(7));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(lookup_learnable(a, i), lookup_learnable(b, i));
}

TEST(Learnable, OutOfRangeThrows) {
  numerics::ParameterStore store;
  const LearnablePositionTable table(store, "pos", 10, 4, CounterRng(7));
  EXPECT_THROW(lookup_learnable(table, 10), ConfigurationError);
  numerics::Tape tape;
  const std::size_t bad[] = {3, 10};
  EXPECT_THROW(lookup_learnable(tape, table, bad), ConfigurationError);
}

TEST(Learnable, SingleGradientStepOnOneRow) {
  numerics::ParameterStore store;
  const LearnablePositionTable table(store, "pos", 10, 4, CounterRng(7));
  const DenseMatrix before = table.parameter().value;
  store.zero_grad();
  numerics::Tape tape;
  const std::size_t idx[] = {3};
  tape.backprop(numerics::sum(lookup_learnable(tape, table, idx)));
  numerics::Parameter& p = table.parameter();
  for (std::size_t k = 0; k < p.value.size(); ++k) p.value.values()[k] -= 0.1 * p.grad.values()[k];
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const double expected = before(r, c) - (r == 3 ? 0.1 : 0.0);
      EXPECT_EQ(p.value(r, c), expected);
    }
}

TEST(Learnable, IndexHelpers) {
  EXPECT_EQ(spatial_cell_index({0.0, 0.0, 0.0}, 16), 0u);
  EXPECT_EQ(spatial_cell_index({1.0, 1.0, 0.0}, 16), 255u);
  EXPECT_EQ(spatial_cell_index({0.5, 0.0, 0.0}, 16), 8u);
  EXPECT_EQ(spatial_cell_index({0.0, 0.5, 0.0}, 16), 128u);
  EXPECT_EQ(temporal_index(0.0, 8), 0u);
  EXPECT_EQ(temporal_index(0.375, 8), 3u);
  EXPECT_EQ(temporal_index(1.0, 8), 8u);
}

}  // namespace
}  // namespace streamrope::embeddings
