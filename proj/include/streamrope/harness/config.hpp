// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "streamrope/decoder/config.hpp"
#include "streamrope/embeddings/coords.hpp"
#include "streamrope/harness/loss.hpp"
#include "streamrope/scenes/scenes.hpp"

namespace streamrope::harness {

struct RunSettings {
  std::size_t episodes = 200;
  std::size_t epochs = 20;
  double lr = 1e-3;
  double lr_final = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  LossWeights loss;
  std::size_t eval_episodes = 64;
  double class_threshold = 0.5;
  double match_radius = 2.0;
  std::uint64_t seed = 0;
  std::size_t seeds = 3;  // ablation runs seeds seed, seed + 1, ...
  std::vector<std::string> variants{"rope_spatial", "mrope_spatiotemporal"};
  std::size_t threads = 1;  // ablation runs only
};

// Everything a train/eval/ablate invocation resolves to. `scene.seed` is not
// a key: episode seeds are derived from `run.seed`.
struct RunConfig {
  scenes::SceneConfig scene;
  decoder::DecoderConfig decoder;
  RunSettings run;

  embeddings::CoordNormalizer normalizer() const;
  // Final learning rate of the cosine schedule, never above lr.
  double final_lr() const;
  void validate() const;
};

// Every recognized key, in manifest order.
std::vector<std::string_view> config_keys();

enum class KeyGroup { kScene, kDecoder, kRun };
// Throws ConfigurationError for unknown keys.
KeyGroup key_group(std::string_view key);

// Throws ConfigurationError for unknown keys and malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Flat `key = value` lines; `#` starts a comment, blank lines are ignored.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// (key, value) for every key, values formatted so that parsing them back
// reproduces the config exactly.
std::vector<std::pair<std::string, std::string>> resolved_settings(const RunConfig& config);

std::string format_double(double value);

// "streamrope <version>"
std::string code_version();

}  // namespace streamrope::harness
