// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "streamrope/embeddings/rotary.hpp"
#include "streamrope/harness/matching.hpp"
#include "streamrope/harness/training.hpp"
#include "streamrope/numerics/grad_check.hpp"
#include "streamrope/numerics/random.hpp"

namespace streamrope::harness {

namespace {

using embeddings::SpatioTemporalCoord;
using numerics::CounterRng;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct RotarySetup {
  embeddings::ChannelPartition partition;
  embeddings::FrequencySpectrum spec_t;
  embeddings::FrequencySpectrum spec_xy;

  explicit RotarySetup(const decoder::DecoderConfig& c)
      : partition(c.rotary_partition()),
        spec_t(c.base, partition.pairs_t, c.time_scale),
        spec_xy(c.base, partition.pairs_x, c.position_scale) {}

  std::vector<double> rotate(std::span<const double> v, const SpatioTemporalCoord& at) const {
    return embeddings::apply_rotation(v, embeddings::mrope_angles(at, partition, spec_t, spec_xy));
  }
};

std::vector<double> normal_vector(CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

SpatioTemporalCoord uniform_coord(CounterRng& rng) {
  SpatioTemporalCoord c;
  c.x = rng.uniform();
  c.y = rng.uniform();
  c.t = rng.uniform();
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_diff(const numerics::DenseMatrix& a, const numerics::DenseMatrix& b) {
  if (!a.same_shape(b)) return std::numeric_limits<double>::infinity();
  return numerics::max_abs_difference(a, b);
}

double max_logit_diff(const std::vector<decoder::AttentionTrace>& a,
                      const std::vector<decoder::AttentionTrace>& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l)
    for (std::size_t h = 0; h < a[l].logits.size(); ++h)
      worst = std::max(worst, max_diff(a[l].logits[h], b[l].logits[h]));
  return worst;
}

// Exhaustive minimum over injective row -> column maps (rows <= cols).
double brute_force_min(const numerics::DenseMatrix& cost) {
  const bool flip = cost.rows() > cost.cols();
  const numerics::DenseMatrix c = flip ? numerics::transpose(cost) : cost;
  std::vector<std::size_t> cols(c.cols());
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < c.rows(); ++r) total += c(r, cols[r]);
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace

CheckResult check_relative_offset(const decoder::DecoderConfig& config,
                                  std::size_t cases_per_block, std::uint64_t seed) {
  Stopwatch clock;
  CheckResult r{"rotary_relative_offset", 0, 0.0, 1e-6, 0.0, 10.0, ""};
  const RotarySetup setup(config);
  const std::size_t dim = 2 * setup.partition.total_pairs();
  const std::size_t block_pairs[3] = {setup.partition.pairs_t, setup.partition.pairs_x,
                                      setup.partition.pairs_y};
  CounterRng root(seed, {0x72656c});
  for (int axis = 0; axis < 3; ++axis) {
    if (block_pairs[axis] == 0) continue;
    CounterRng rng = root.split(static_cast<std::uint64_t>(axis));
    for (std::size_t i = 0; i < cases_per_block; ++i) {
      const auto q = normal_vector(rng, dim);
      const auto k = normal_vector(rng, dim);
      const SpatioTemporalCoord a = uniform_coord(rng);
      const SpatioTemporalCoord b = uniform_coord(rng);
      const double s = rng.uniform(-1.0, 1.0);
      SpatioTemporalCoord as = a;
      SpatioTemporalCoord bs = b;
      double* fields[3][2] = {{&as.t, &bs.t}, {&as.x, &bs.x}, {&as.y, &bs.y}};
      *fields[axis][0] += s;
      *fields[axis][1] += s;
      const double base = dot(setup.rotate(q, a), setup.rotate(k, b));
      const double shifted = dot(setup.rotate(q, as), setup.rotate(k, bs));
      r.measured = std::max(r.measured, std::abs(base - shifted));
      ++r.cases;
    }
  }
  r.seconds = clock.seconds();
  return r;
}

CheckResult check_norm_preservation(const decoder::DecoderConfig& config, std::size_t cases,
                                    std::uint64_t seed) {
  Stopwatch clock;
  CheckResult r{"rotary_norm_preservation", 0, 0.0, 1e-12, 0.0, 5.0, ""};
  const RotarySetup setup(config);
  const std::size_t dim = 2 * setup.partition.total_pairs();
  CounterRng rng(seed, {0x6e6f726d});
  for (std::size_t i = 0; i < cases; ++i) {
    const auto v = normal_vector(rng, dim);
    const auto rotated = setup.rotate(v, uniform_coord(rng));
    const double err = std::abs(std::sqrt(dot(rotated, rotated)) - std::sqrt(dot(v, v)));
    r.measured = std::max(r.measured, err);
    ++r.cases;
  }
  r.seconds = clock.seconds();
  return r;
}

CheckResult check_rotation_composition(const decoder::DecoderConfig& config, std::size_t cases,
                                       std::uint64_t seed) {
  Stopwatch clock;
  CheckResult r{"rotary_composition", 0, 0.0, 1e-9, 0.0, 5.0, ""};
  const RotarySetup setup(config);
  const std::size_t dim = 2 * setup.partition.total_pairs();
  CounterRng rng(seed, {0x636f6d70});
  for (std::size_t i = 0; i < cases; ++i) {
    const auto v = normal_vector(rng, dim);
    const auto theta =
        embeddings::mrope_angles(uniform_coord(rng), setup.partition, setup.spec_t, setup.spec_xy);
    const auto phi =
        embeddings::mrope_angles(uniform_coord(rng), setup.partition, setup.spec_t, setup.spec_xy);
    std::vector<double> sum(theta.angles.size());
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] = theta.angles[j] + phi.angles[j];
    const auto once = embeddings::apply_rotation(v, sum);
    const auto twice =
        embeddings::apply_rotation(embeddings::apply_rotation(v, theta.angles), phi.angles);
    for (std::size_t j = 0; j < dim; ++j) r.measured = std::max(r.measured, std::abs(once[j] - twice[j]));
    ++r.cases;
  }
  r.seconds = clock.seconds();
  return r;
}

CheckResult check_shift_invariance(const RunConfig& config, std::size_t episodes,
                                   std::uint64_t seed) {
  Stopwatch clock;
  CheckResult r{"decoder_shift_invariance", 0, 0.0, 1e-5, 0.0, 60.0, ""};
  decoder::DecoderConfig dc = config.decoder;
  dc.zero_init_heads = false;
  CounterRng rng(seed, {0x7368696674});
  double worst_logit = 0.0;

  for (std::size_t e = 0; e < episodes; ++e) {
    scenes::SceneConfig sc = config.scene;
    sc.seed = rng.next_u64();
    const scenes::Episode episode = scenes::generate_episode(sc);
    const decoder::StreamingDecoder model(dc, config.normalizer(), rng.next_u64());
    decoder::StreamingDecoder moved(model);
    embeddings::CoordNormalizer shifted = config.normalizer();
    // Small enough that no normalized coordinate leaves [0, 1].
    shifted.shift = {rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(0.0, 0.1)};
    moved.set_normalizer(shifted);

    numerics::Tape tape_a;
    numerics::Tape tape_b;
    decoder::MemoryQueue mem_a = model.empty_memory();
    decoder::MemoryQueue mem_b = moved.empty_memory();
    for (const auto& frame : episode) {
      decoder::DecodeTrace trace_a;
      decoder::DecodeTrace trace_b;
      const auto tokens = frame.as_tokens();
      const auto out_a = model.decode_frame(tape_a, tokens, mem_a, &trace_a);
      const auto out_b = moved.decode_frame(tape_b, tokens, mem_b, &trace_b);
      for (std::size_t q = 0; q < out_a.detections.size(); ++q) {
        const auto& da = out_a.detections[q];
        const auto& db = out_b.detections[q];
        for (const double d :
             {da.center.x - db.center.x, da.center.y - db.center.y, da.velocity.x - db.velocity.x,
              da.velocity.y - db.velocity.y, da.class_prob - db.class_prob}) {
          r.measured = std::max(r.measured, std::abs(d));
        }
      }
      worst_logit = std::max({worst_logit,
                              max_logit_diff(trace_a.self_attention, trace_b.self_attention),
                              max_logit_diff(trace_a.cross_attention, trace_b.cross_attention)});
      mem_a = decoder::propagate_memory(out_a, mem_a, frame.frame_id, dc);
      mem_b = decoder::propagate_memory(out_b, mem_b, frame.frame_id, dc);
    }
    ++r.cases;
  }
  r.detail = "max attention logit difference " + format_double(worst_logit);
  if (!(worst_logit <= 1e-6)) r.measured = std::numeric_limits<double>::infinity();
  r.seconds = clock.seconds();
  return r;
}

CheckResult check_gradient_fidelity(const RunConfig& config, std::uint64_t seed) {
  Stopwatch clock;
  CheckResult r{"end_to_end_gradient", 0, 0.0, 1e-4, 0.0, 120.0, ""};
  scenes::SceneConfig sc = config.scene;
  sc.grid_n = 3;
  sc.frames = 2;
  sc.n_objects = std::min<std::size_t>(sc.n_objects, 2);
  sc.speed_max = std::min(sc.speed_max, sc.extent / 4.0);
  sc.speed_min = std::min(sc.speed_min, sc.speed_max);
  sc.seed = CounterRng(seed, {0x67726164}).next_u64();
  const scenes::Episode episode = scenes::generate_episode(sc);

  decoder::DecoderConfig dc = config.decoder;
  dc.n_queries = 2;
  dc.zero_init_heads = false;
  embeddings::CoordNormalizer normalizer = config.normalizer();
  normalizer.window = sc.frames;
  decoder::StreamingDecoder model(dc, normalizer, seed);

  const std::vector<numerics::Parameter*> params = model.parameters().all();
  const LossWeights weights = config.run.loss;
  const auto report = numerics::grad_check_central_diff(
      [&](numerics::Tape& tape) { return episode_loss(tape, model, episode, weights); }, params,
      1e-5);
  r.cases = report.entries_checked;
  r.measured = report.finite ? report.max_relative_error : std::numeric_limits<double>::infinity();
  r.detail = "worst " + report.worst_parameter + "[" + std::to_string(report.worst_index) + "]";
  r.seconds = clock.seconds();
  return r;
}

CheckResult check_matcher_optimality(std::size_t cases, std::uint64_t seed) {
  Stopwatch clock;
  CheckResult r{"matcher_optimality", 0, 0.0, 0.0, 0.0, 30.0, ""};
  CounterRng rng(seed, {0x6875});
  for (std::size_t i = 0; i < cases; ++i) {
    const auto rows = 1 + static_cast<std::size_t>(rng.next_u64() % 6);
    const auto cols = 1 + static_cast<std::size_t>(rng.next_u64() % 6);
    numerics::DenseMatrix cost(rows, cols);
    for (double& v : cost.values()) v = static_cast<double>(rng.next_u64() % 10);
    const MatchResult m = hungarian_match(cost);
    double err = std::abs(m.total_cost - brute_force_min(cost));
    double sum = 0.0;
    std::vector<bool> row_used(rows, false);
    std::vector<bool> col_used(cols, false);
    for (const auto& [a, b] : m.pairs) {
      if (a >= rows || b >= cols || row_used[a] || col_used[b]) {
        err = std::numeric_limits<double>::infinity();
        break;
      }
      row_used[a] = col_used[b] = true;
      sum += cost(a, b);
    }
    if (m.pairs.size() != std::min(rows, cols) || sum != m.total_cost) {
      err = std::numeric_limits<double>::infinity();
    }
    r.measured = std::max(r.measured, err);
    ++r.cases;
  }
  r.seconds = clock.seconds();
  return r;
}

std::vector<CheckResult> run_check_suite(const RunConfig& config, std::uint64_t seed) {
  return {
      check_relative_offset(config.decoder, 1000, seed),
      check_norm_preservation(config.decoder, 1000, seed),
      check_rotation_composition(config.decoder, 1000, seed),
      check_shift_invariance(config, 50, seed),
      check_gradient_fidelity(config, seed),
      check_matcher_optimality(1000, seed),
  };
}

}  // namespace streamrope::harness
