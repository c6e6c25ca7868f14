// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/ablation.hpp"

#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

#include "streamrope/harness/training.hpp"
#include "streamrope/numerics/errors.hpp"

namespace streamrope::harness {

RunConfig apply_variant(const RunConfig& base, std::string_view variant) {
  RunConfig config = base;
  std::size_t start = 0;
  bool first = true;
  while (start <= variant.size()) {
    const auto semi = variant.find(';', start);
    const auto piece =
        variant.substr(start, semi == std::string_view::npos ? variant.npos : semi - start);
    if (first) {
      config.decoder.embedding_mode = decoder::parse_embedding_mode(piece);
      first = false;
    } else {
      const auto eq = piece.find('=');
      if (eq == piece.npos) {
        throw ConfigurationError("variant override '" + std::string(piece) + "' lacks '='");
      }
      const auto key = piece.substr(0, eq);
      if (key_group(key) != KeyGroup::kDecoder) {
        throw ConfigurationError("variant may only override decoder keys, got '" +
                                 std::string(key) + "'");
      }
      apply_setting(config, key, piece.substr(eq + 1));
    }
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  config.validate();
  return config;
}

Metrics mean_metrics(const std::vector<Metrics>& rows) {
  Metrics out;
  double center = 0.0;
  double velocity = 0.0;
  std::size_t defined = 0;
  for (const Metrics& m : rows) {
    if (m.matches > 0) {
      center += m.center_mae;
      velocity += m.velocity_mae;
      ++defined;
    }
    out.precision += m.precision;
    out.recall += m.recall;
    out.matches += m.matches;
    out.predictions += m.predictions;
    out.ground_truth += m.ground_truth;
  }
  if (defined > 0) {
    out.center_mae = center / static_cast<double>(defined);
    out.velocity_mae = velocity / static_cast<double>(defined);
  }
  if (!rows.empty()) {
    out.precision /= static_cast<double>(rows.size());
    out.recall /= static_cast<double>(rows.size());
  }
  return out;
}

AblationResult run_ablation(const RunConfig& base, const std::vector<std::string>& variants,
                            const ProgressFn& progress) {
  if (variants.empty()) throw ConfigurationError("ablation needs at least one variant");
  std::vector<RunConfig> configs;
  for (const auto& v : variants) configs.push_back(apply_variant(base, v));

  const std::size_t n_seeds = base.run.seeds;
  // metrics[v][s]
  std::vector<std::vector<Metrics>> metrics(variants.size(), std::vector<Metrics>(n_seeds));
  AblationResult result;

  for (std::size_t s = 0; s < n_seeds; ++s) {
    RunConfig seeded = base;
    seeded.run.seed = base.run.seed + s;
    const EpisodeSet train_set = make_training_set(seeded);
    const EpisodeSet eval_set = make_eval_set(seeded);

    std::vector<std::vector<std::uint64_t>> consumed(variants.size());
    std::vector<std::exception_ptr> errors(variants.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t v = next++; v < variants.size(); v = next++) {
        try {
          RunConfig config = configs[v];
          config.run.seed = seeded.run.seed;
          TrainResult trained = train(config, train_set);
          metrics[v][s] = evaluate_predictor(decoder_predictor(trained.model), eval_set.episodes,
                                             config.run.class_threshold, config.run.match_radius);
          consumed[v] = std::move(trained.consumed_seeds);
        } catch (...) {
          errors[v] = std::current_exception();
        }
      }
    };
    const std::size_t n_threads = std::min(base.run.threads, variants.size());
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (std::size_t v = 1; v < variants.size(); ++v) {
      if (consumed[v] != consumed[0]) {
        throw std::logic_error("variant '" + variants[v] +
                               "' consumed a different episode sequence than '" + variants[0] +
                               "'");
      }
    }
    result.consumed_seeds.push_back(std::move(consumed[0]));
    if (progress) {
      for (std::size_t v = 0; v < variants.size(); ++v) {
        progress("seed " + std::to_string(seeded.run.seed) + " " + variants[v] +
                 ": velocity_mae " + format_double(metrics[v][s].velocity_mae) +
                 " center_mae " + format_double(metrics[v][s].center_mae));
      }
    }
  }

  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t s = 0; s < n_seeds; ++s) {
      result.rows.push_back({variants[v], std::to_string(base.run.seed + s), metrics[v][s]});
    }
    result.rows.push_back({variants[v], "mean", mean_metrics(metrics[v])});
  }
  return result;
}

}  // namespace streamrope::harness
