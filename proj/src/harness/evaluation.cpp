// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/evaluation.hpp"

#include <cmath>

#include "streamrope/harness/matching.hpp"
#include "streamrope/harness/training.hpp"

namespace streamrope::harness {

namespace {

double distance(const embeddings::BevPoint& a, const embeddings::BevPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

Predictor decoder_predictor(const decoder::StreamingDecoder& model) {
  return [&model](const scenes::Episode& episode) {
    std::vector<std::vector<decoder::Detection>> out;
    numerics::Tape tape;
    decoder::MemoryQueue memory = model.empty_memory();
    for (const auto& frame : episode) {
      decoder::FrameOutput frame_out = model.decode_frame(tape, frame.as_tokens(), memory);
      memory = decoder::propagate_memory(frame_out, memory, frame.frame_id, model.config());
      out.push_back(std::move(frame_out.detections));
    }
    return out;
  };
}

Predictor oracle_predictor() {
  return [](const scenes::Episode& episode) {
    std::vector<std::vector<decoder::Detection>> out;
    for (const auto& frame : episode) {
      auto& dets = out.emplace_back();
      for (const auto& obj : frame.objects) dets.push_back({obj.center, obj.velocity, 1.0});
    }
    return out;
  };
}

Metrics evaluate_predictor(const Predictor& predictor, std::span<const scenes::Episode> episodes,
                           double class_threshold, double match_radius) {
  Metrics m;
  double center_sum = 0.0;
  double velocity_sum = 0.0;
  for (const auto& episode : episodes) {
    const auto predicted = predictor(episode);
    for (std::size_t f = 1; f < episode.size(); ++f) {
      std::vector<decoder::Detection> kept;
      for (const auto& d : predicted.at(f))
        if (d.class_prob >= class_threshold) kept.push_back(d);
      const auto& objects = episode[f].objects;
      m.predictions += kept.size();
      m.ground_truth += objects.size();
      if (kept.empty() || objects.empty()) continue;

      numerics::DenseMatrix cost(kept.size(), objects.size());
      for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = 0; j < objects.size(); ++j)
          cost(i, j) = distance(kept[i].center, objects[j].center);
      for (const auto& [i, j] : hungarian_match(cost).pairs) {
        if (cost(i, j) > match_radius) continue;
        ++m.matches;
        center_sum += cost(i, j);
        velocity_sum += distance(kept[i].velocity, objects[j].velocity);
      }
    }
  }
  if (m.matches > 0) {
    const auto n = static_cast<double>(m.matches);
    m.center_mae = center_sum / n;
    m.velocity_mae = velocity_sum / n;
  }
  if (m.predictions > 0) {
    m.precision = static_cast<double>(m.matches) / static_cast<double>(m.predictions);
  }
  if (m.ground_truth > 0) {
    m.recall = static_cast<double>(m.matches) / static_cast<double>(m.ground_truth);
  }
  return m;
}

Metrics evaluate(const decoder::StreamingDecoder& model, const RunConfig& config) {
  const EpisodeSet eval = make_eval_set(config);
  return evaluate_predictor(decoder_predictor(model), eval.episodes, config.run.class_threshold,
                            config.run.match_radius);
}

}  // namespace streamrope::harness
