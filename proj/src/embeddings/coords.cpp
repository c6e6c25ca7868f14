// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/embeddings/coords.hpp"

#include <algorithm>
#include <vector>

#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/ops.hpp"

namespace streamrope::embeddings {

using numerics::DenseMatrix;
using numerics::Tape;
using numerics::Var;

std::pair<double, double> normalize_bev(double x, double y, double extent) {
  if (!(extent > 0.0)) throw ConfigurationError("normalize_bev: extent must be positive");
  const double inv = 1.0 / (2.0 * extent);
  return {std::clamp((x + extent) * inv, 0.0, 1.0), std::clamp((y + extent) * inv, 0.0, 1.0)};
}

double normalize_time(std::int64_t frame_id, std::size_t window) {
  if (window < 1) throw ConfigurationError("normalize_time: window must be >= 1");
  return std::clamp(static_cast<double>(frame_id) / static_cast<double>(window), 0.0, 1.0);
}

SpatioTemporalCoord CoordNormalizer::normalize(BevPoint p, std::int64_t frame_id) const {
  const double inv = 1.0 / (2.0 * extent);
  return {std::clamp((p.x + extent) * inv + shift.x, 0.0, 1.0),
          std::clamp((p.y + extent) * inv + shift.y, 0.0, 1.0), time(frame_id)};
}

double CoordNormalizer::time(std::int64_t frame_id) const {
  return std::clamp(normalize_time(frame_id, window) + shift.t, 0.0, 1.0);
}

Var CoordNormalizer::normalize_points(Var xy) const {
  if (xy.cols() != 2) throw ConfigurationError("normalize_points: expected n x 2 input");
  const double inv = 1.0 / (2.0 * extent);
  const double offsets[2] = {shift.x, shift.y};
  const DenseMatrix& in = xy.value();
  DenseMatrix out(in.rows(), 2);
  auto inside = std::make_shared<std::vector<char>>(in.size());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double v = (in(r, c) + extent) * inv + offsets[c];
      out(r, c) = std::clamp(v, 0.0, 1.0);
      (*inside)[r * 2 + c] = (v > 0.0 && v < 1.0) ? 1 : 0;
    }
  }
  return xy.tape().record(std::move(out), {xy}, [xy, inv, inside](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    DenseMatrix gx(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx.values()[i] = (*inside)[i] ? g.values()[i] * inv : 0.0;
    }
    tp.accumulate(xy, gx);
  });
}

Var CoordNormalizer::coords(Var xy, std::span<const std::int64_t> frame_ids) const {
  if (frame_ids.size() != xy.rows()) {
    throw ConfigurationError("CoordNormalizer::coords: one frame id per point required");
  }
  DenseMatrix t(xy.rows(), 1);
  for (std::size_t r = 0; r < frame_ids.size(); ++r) t(r, 0) = time(frame_ids[r]);
  const Var parts[2] = {xy.tape().constant(std::move(t)), normalize_points(xy)};
  return numerics::concat_cols(parts);
}

}  // namespace streamrope::embeddings
