// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/training.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "streamrope/harness/optimizer.hpp"
#include "streamrope/numerics/ops.hpp"
#include "streamrope/numerics/errors.hpp"
#include "streamrope/numerics/random.hpp"

namespace streamrope::harness {

namespace {

constexpr std::uint64_t kTrainTag = 0x747261696e;  // "train"
constexpr std::uint64_t kEvalTag = 0x6576616c;     // "eval"
constexpr std::uint64_t kShuffleTag = 0x73687566;  // "shuf"

EpisodeSet make_set(const RunConfig& config, std::size_t count,
                    std::uint64_t (*seed_of)(std::uint64_t, std::size_t)) {
  EpisodeSet set;
  set.seeds.reserve(count);
  set.episodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    scenes::SceneConfig scene = config.scene;
    scene.seed = seed_of(config.run.seed, i);
    set.seeds.push_back(scene.seed);
    set.episodes.push_back(scenes::generate_episode(scene));
  }
  return set;
}

}  // namespace

std::uint64_t train_episode_seed(std::uint64_t run_seed, std::size_t index) {
  return numerics::CounterRng(run_seed, {kTrainTag, index}).next_u64();
}

std::uint64_t eval_episode_seed(std::uint64_t run_seed, std::size_t index) {
  return numerics::CounterRng(run_seed, {kEvalTag, index}).next_u64();
}

EpisodeSet make_training_set(const RunConfig& config) {
  return make_set(config, config.run.episodes, &train_episode_seed);
}

EpisodeSet make_eval_set(const RunConfig& config) {
  return make_set(config, config.run.eval_episodes, &eval_episode_seed);
}

numerics::Var episode_loss(numerics::Tape& tape, const decoder::StreamingDecoder& model,
                           const scenes::Episode& episode, const LossWeights& weights) {
  decoder::MemoryQueue memory = model.empty_memory();
  numerics::Var total;
  for (const auto& frame : episode) {
    const decoder::FrameOutput out = model.decode_frame(tape, frame.as_tokens(), memory);
    const LossResult loss =
        detection_loss(out.centers, out.velocities, out.class_logits, frame.objects, weights);
    total = total.valid() ? numerics::add(total, loss.loss) : loss.loss;
    memory = decoder::propagate_memory(out, memory, frame.frame_id, model.config());
  }
  return total;
}

decoder::StreamingDecoder make_model(const RunConfig& config) {
  return decoder::StreamingDecoder(config.decoder, config.normalizer(), config.run.seed);
}

TrainResult train(const RunConfig& config, const EpisodeSet& data) {
  config.validate();
  if (data.episodes.size() != data.seeds.size() || data.episodes.empty()) {
    throw ConfigurationError("training set is empty or inconsistent");
  }
  TrainResult result{make_model(config), {}, {}};
  Adam adam(result.model.parameters(),
            AdamConfig{config.run.beta1, config.run.beta2, config.run.adam_eps});

  const std::size_t n = data.episodes.size();
  const std::size_t total_steps = n * config.run.epochs;
  const double lr_final = config.final_lr();
  numerics::CounterRng shuffle(config.run.seed, {kShuffleTag});
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.run.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    double lr = config.run.lr;
    for (const std::size_t idx : order) {
      const auto where = [&] {
        return " in episode seed " + std::to_string(data.seeds[idx]) + " (epoch " +
               std::to_string(epoch) + ", step " + std::to_string(step) + ")";
      };
      numerics::Tape tape;
      numerics::Var loss;
      try {
        loss = episode_loss(tape, result.model, data.episodes[idx], config.run.loss);
      } catch (const NumericalError& e) {
        throw NumericalError(e.what() + where());
      }
      const double value = loss.scalar();
      if (!std::isfinite(value)) {
        throw NumericalError("non-finite loss " + format_double(value) + where());
      }
      result.model.parameters().zero_grad();
      tape.backprop(loss);
      lr = cosine_lr(config.run.lr, lr_final, step, total_steps);
      adam.step(lr);
      loss_sum += value;
      result.consumed_seeds.push_back(data.seeds[idx]);
      ++step;
    }
    result.log.push_back({epoch, loss_sum / static_cast<double>(n), lr});
  }
  return result;
}

TrainResult train(const RunConfig& config) { return train(config, make_training_set(config)); }

}  // namespace streamrope::harness
