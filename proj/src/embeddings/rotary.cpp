// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/embeddings/rotary.hpp"

#include <cmath>
#include <string>

#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/ops.hpp"

namespace streamrope::embeddings {

using numerics::DenseMatrix;
using numerics::Tape;
using numerics::Var;

namespace {

void check_spectra(const ChannelPartition& partition, const FrequencySpectrum& spec_t,
                   const FrequencySpectrum& spec_xy) {
  if (partition.pairs_x != partition.pairs_y) {
    throw ConfigurationError("rotary partition needs pairs_x == pairs_y");
  }
  if (spec_t.n_pairs() != partition.pairs_t) {
    throw ConfigurationError("temporal spectrum has " + std::to_string(spec_t.n_pairs()) +
                             " pairs, partition wants " + std::to_string(partition.pairs_t));
  }
  if (spec_xy.n_pairs() != partition.pairs_x) {
    throw ConfigurationError("spatial spectrum has " + std::to_string(spec_xy.n_pairs()) +
                             " pairs, partition wants " + std::to_string(partition.pairs_x));
  }
}

}  // namespace

RotaryAngles mrope_angles(const SpatioTemporalCoord& coord, const ChannelPartition& partition,
                          const FrequencySpectrum& spec_t, const FrequencySpectrum& spec_xy) {
  check_spectra(partition, spec_t, spec_xy);
  RotaryAngles out{partition, std::vector<double>(partition.total_pairs())};
  for (std::size_t i = 0; i < partition.pairs_t; ++i) {
    out.angles[i] = coord.t * (spec_t.position_scale() * spec_t.frequency(i));
  }
  for (std::size_t i = 0; i < partition.pairs_x; ++i) {
    const double step = spec_xy.position_scale() * spec_xy.frequency(i);
    out.angles[partition.x_offset() + i] = coord.x * step;
    out.angles[partition.y_offset() + i] = coord.y * step;
  }
  return out;
}

std::vector<double> apply_rotation(std::span<const double> v, std::span<const double> angles) {
  if (v.size() != 2 * angles.size()) {
    throw ConfigurationError("apply_rotation: vector length " + std::to_string(v.size()) +
                             " != 2 x " + std::to_string(angles.size()) + " angles");
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double c = std::cos(angles[i]);
    const double s = std::sin(angles[i]);
    const double a = v[2 * i];
    const double b = v[2 * i + 1];
    out[2 * i] = a * c - b * s;
    out[2 * i + 1] = a * s + b * c;
  }
  return out;
}

std::vector<double> apply_rotation(std::span<const double> v, const RotaryAngles& angles) {
  return apply_rotation(v, std::span<const double>(angles.angles));
}

AngleProjection::AngleProjection(const ChannelPartition& partition,
                                 const FrequencySpectrum& spec_t,
                                 const FrequencySpectrum& spec_xy)
    : partition_(partition), matrix_(3, partition.total_pairs()) {
  check_spectra(partition, spec_t, spec_xy);
  for (std::size_t i = 0; i < partition.pairs_t; ++i) {
    matrix_(0, i) = spec_t.position_scale() * spec_t.frequency(i);
  }
  for (std::size_t i = 0; i < partition.pairs_x; ++i) {
    const double step = spec_xy.position_scale() * spec_xy.frequency(i);
    matrix_(1, partition.x_offset() + i) = step;
    matrix_(2, partition.y_offset() + i) = step;
  }
}

DenseMatrix AngleProjection::angles(const DenseMatrix& coords) const {
  if (coords.cols() != 3) throw ConfigurationError("AngleProjection: coords must be n x 3");
  // Written out rather than via matmul so each angle is the single product
  // coord * (S * omega), identical to mrope_angles.
  DenseMatrix out(coords.rows(), pairs());
  for (std::size_t r = 0; r < coords.rows(); ++r) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double c = coords(r, b);
      for (std::size_t i = 0; i < pairs(); ++i) {
        if (matrix_(b, i) != 0.0) out(r, i) = c * matrix_(b, i);
      }
    }
  }
  return out;
}

Var AngleProjection::angles(Var coords) const {
  const DenseMatrix m = matrix_;
  return coords.tape().record(angles(coords.value()), {coords}, [coords, m](Tape& tp, Var self) {
    tp.accumulate(coords, numerics::matmul_nt(tp.grad(self), m));
  });
}

Var rotate_pairs(Var x, Var angles) {
  const DenseMatrix& xv = x.value();
  const DenseMatrix& av = angles.value();
  const std::size_t pairs = av.cols();
  if (xv.rows() != av.rows()) throw ConfigurationError("rotate_pairs: row count mismatch");
  if (pairs == 0 || xv.cols() % (2 * pairs) != 0) {
    throw ConfigurationError("rotate_pairs: " + std::to_string(xv.cols()) +
                             " channels not a multiple of 2 x " + std::to_string(pairs));
  }
  const std::size_t blocks = xv.cols() / (2 * pairs);
  auto cs = std::make_shared<DenseMatrix>(av.rows(), 2 * pairs);
  DenseMatrix out(xv.rows(), xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t i = 0; i < pairs; ++i) {
      const double c = std::cos(av(r, i));
      const double s = std::sin(av(r, i));
      (*cs)(r, 2 * i) = c;
      (*cs)(r, 2 * i + 1) = s;
      for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t k = b * 2 * pairs + 2 * i;
        const double a0 = xv(r, k);
        const double a1 = xv(r, k + 1);
        out(r, k) = a0 * c - a1 * s;
        out(r, k + 1) = a0 * s + a1 * c;
      }
    }
  }
  return x.tape().record(
      std::move(out), {x, angles}, [x, angles, cs, pairs, blocks](Tape& tp, Var self) {
        const DenseMatrix& g = tp.grad(self);
        const DenseMatrix& y = self.value();
        const bool need_x = tp.requires_grad(x);
        const bool need_a = tp.requires_grad(angles);
        DenseMatrix gx(need_x ? g.rows() : 0, need_x ? g.cols() : 0);
        DenseMatrix ga(need_a ? g.rows() : 0, need_a ? pairs : 0);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t i = 0; i < pairs; ++i) {
            const double c = (*cs)(r, 2 * i);
            const double s = (*cs)(r, 2 * i + 1);
            double dtheta = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) {
              const std::size_t k = b * 2 * pairs + 2 * i;
              const double g0 = g(r, k);
              const double g1 = g(r, k + 1);
              if (need_x) {
                gx(r, k) = g0 * c + g1 * s;
                gx(r, k + 1) = -g0 * s + g1 * c;
              }
              dtheta += -g0 * y(r, k + 1) + g1 * y(r, k);
            }
            if (need_a) ga(r, i) = dtheta;
          }
        }
        if (need_x) tp.accumulate(x, gx);
        if (need_a) tp.accumulate(angles, ga);
      });
}

Var sincos_pairs(Var angles) {
  const DenseMatrix& av = angles.value();
  DenseMatrix out(av.rows(), 2 * av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t i = 0; i < av.cols(); ++i) {
      out(r, 2 * i) = std::sin(av(r, i));
      out(r, 2 * i + 1) = std::cos(av(r, i));
    }
  }
  return angles.tape().record(std::move(out), {angles}, [angles](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    const DenseMatrix& y = self.value();
    DenseMatrix ga(g.rows(), g.cols() / 2);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (std::size_t i = 0; i < ga.cols(); ++i)
        ga(r, i) = g(r, 2 * i) * y(r, 2 * i + 1) - g(r, 2 * i + 1) * y(r, 2 * i);
    tp.accumulate(angles, ga);
  });
}

}  // namespace streamrope::embeddings
