// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "streamrope/decoder/decoder.hpp"
#include "streamrope/harness/config.hpp"
#include "streamrope/harness/loss.hpp"
#include "streamrope/scenes/scenes.hpp"

namespace streamrope::harness {

// Seed of training episode i / evaluation episode i of a run. The two
// families come from separate streams.
std::uint64_t train_episode_seed(std::uint64_t run_seed, std::size_t index);
std::uint64_t eval_episode_seed(std::uint64_t run_seed, std::size_t index);

struct EpisodeSet {
  std::vector<std::uint64_t> seeds;
  std::vector<scenes::Episode> episodes;
};

EpisodeSet make_training_set(const RunConfig& config);
EpisodeSet make_eval_set(const RunConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;  // mean over episodes of the frame-summed loss
  double lr = 0.0;         // learning rate of the epoch's last step
};

struct TrainResult {
  decoder::StreamingDecoder model;
  std::vector<EpochRecord> log;
  std::vector<std::uint64_t> consumed_seeds;  // in step order
};

// Frame-summed detection loss of one episode on `tape`, memory carried
// between frames.
numerics::Var episode_loss(numerics::Tape& tape, const decoder::StreamingDecoder& model,
                           const scenes::Episode& episode, const LossWeights& weights);

// Freshly initialized decoder for a run; initialization depends only on the
// decoder config and run seed.
decoder::StreamingDecoder make_model(const RunConfig& config);

// One optimizer step per episode, episodes reshuffled every epoch, cosine
// learning-rate decay over all steps. Throws NumericalError naming the
// episode seed when a loss is not finite.
TrainResult train(const RunConfig& config, const EpisodeSet& data);
TrainResult train(const RunConfig& config);

}  // namespace streamrope::harness
