// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

#include "streamrope/numerics/errors.hpp"

#ifndef STREAMROPE_VERSION
#define STREAMROPE_VERSION "0.0.0"
#endif

namespace streamrope::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigurationError("invalid value '" + std::string(value) + "' for key '" +
                           std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto piece =
        trim(value.substr(start, comma == std::string_view::npos ? value.npos : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Field {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field size_field(std::string_view key, T RunConfig::*group, std::size_t T::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) {
            c.*group.*member = parse_number<std::size_t>(key, v);
          },
          [=](const RunConfig& c) { return std::to_string(c.*group.*member); }};
}

template <typename T>
Field double_field(std::string_view key, T RunConfig::*group, double T::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) { c.*group.*member = parse_number<double>(key, v); },
          [=](const RunConfig& c) { return format_double(c.*group.*member); }};
}

template <typename T>
Field bool_field(std::string_view key, T RunConfig::*group, bool T::*member) {
  return {key, [=](RunConfig& c, std::string_view v) { c.*group.*member = parse_bool(key, v); },
          [=](const RunConfig& c) { return std::string(c.*group.*member ? "true" : "false"); }};
}

Field loss_field(std::string_view key, double LossWeights::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) { c.run.loss.*member = parse_number<double>(key, v); },
          [=](const RunConfig& c) { return format_double(c.run.loss.*member); }};
}

Field partition_field(std::string_view key, std::size_t embeddings::ChannelPartition::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) {
            c.decoder.partition.*member = parse_number<std::size_t>(key, v);
          },
          [=](const RunConfig& c) { return std::to_string(c.decoder.partition.*member); }};
}

const std::vector<Field>& fields() {
  using decoder::DecoderConfig;
  using scenes::SceneConfig;
  constexpr auto S = &RunConfig::scene;
  constexpr auto D = &RunConfig::decoder;
  constexpr auto R = &RunConfig::run;
  static const std::vector<Field> table{
      double_field("extent", S, &SceneConfig::extent),
      size_field("grid_n", S, &SceneConfig::grid_n),
      size_field("n_objects", S, &SceneConfig::n_objects),
      size_field("frames", S, &SceneConfig::frames),
      double_field("speed_min", S, &SceneConfig::speed_min),
      double_field("speed_max", S, &SceneConfig::speed_max),
      double_field("noise_sigma", S, &SceneConfig::noise_sigma),
      size_field("token_feature_dim", S, &SceneConfig::token_feature_dim),
      size_field("model_dim", D, &DecoderConfig::model_dim),
      size_field("heads", D, &DecoderConfig::heads),
      size_field("layers", D, &DecoderConfig::layers),
      size_field("n_queries", D, &DecoderConfig::n_queries),
      size_field("ffn_dim", D, &DecoderConfig::ffn_dim),
      partition_field("pairs_t", &embeddings::ChannelPartition::pairs_t),
      partition_field("pairs_x", &embeddings::ChannelPartition::pairs_x),
      partition_field("pairs_y", &embeddings::ChannelPartition::pairs_y),
      double_field("base", D, &DecoderConfig::base),
      double_field("position_scale", D, &DecoderConfig::position_scale),
      double_field("time_scale", D, &DecoderConfig::time_scale),
      {"embedding_mode",
       [](RunConfig& c, std::string_view v) {
         c.decoder.embedding_mode = decoder::parse_embedding_mode(v);
       },
       [](const RunConfig& c) { return std::string(decoder::to_string(c.decoder.embedding_mode)); }},
      bool_field("rope_self", D, &DecoderConfig::rope_self),
      bool_field("rope_cross", D, &DecoderConfig::rope_cross),
      bool_field("memory_restamp", D, &DecoderConfig::memory_restamp),
      size_field("memory_capacity", D, &DecoderConfig::memory_capacity),
      size_field("memory_max_age", D, &DecoderConfig::memory_max_age),
      size_field("learnable_grid", D, &DecoderConfig::learnable_grid),
      bool_field("zero_init_heads", D, &DecoderConfig::zero_init_heads),
      double_field("layer_norm_eps", D, &DecoderConfig::layer_norm_eps),
      size_field("episodes", R, &RunSettings::episodes),
      size_field("epochs", R, &RunSettings::epochs),
      double_field("lr", R, &RunSettings::lr),
      double_field("lr_final", R, &RunSettings::lr_final),
      double_field("beta1", R, &RunSettings::beta1),
      double_field("beta2", R, &RunSettings::beta2),
      double_field("adam_eps", R, &RunSettings::adam_eps),
      loss_field("lambda_center", &LossWeights::center),
      loss_field("lambda_vel", &LossWeights::velocity),
      loss_field("lambda_cls", &LossWeights::cls),
      size_field("eval_episodes", R, &RunSettings::eval_episodes),
      double_field("class_threshold", R, &RunSettings::class_threshold),
      double_field("match_radius", R, &RunSettings::match_radius),
      {"seed",
       [](RunConfig& c, std::string_view v) { c.run.seed = parse_number<std::uint64_t>("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.run.seed); }},
      size_field("seeds", R, &RunSettings::seeds),
      {"variants", [](RunConfig& c, std::string_view v) { c.run.variants = parse_list(v); },
       [](const RunConfig& c) {
         std::string out;
         for (const auto& v : c.run.variants) out += (out.empty() ? "" : ",") + v;
         return out;
       }},
      size_field("threads", R, &RunSettings::threads),
  };
  return table;
}

}  // namespace

embeddings::CoordNormalizer RunConfig::normalizer() const {
  embeddings::CoordNormalizer n;
  n.extent = scene.extent;
  n.window = scene.frames;
  return n;
}

double RunConfig::final_lr() const { return std::min(run.lr, run.lr_final); }

void RunConfig::validate() const {
  scene.validate();
  decoder.validate();
  if (scene.token_feature_dim != decoder.model_dim) {
    throw ConfigurationError("token_feature_dim must equal model_dim");
  }
  if (run.episodes == 0 || run.epochs == 0) {
    throw ConfigurationError("episodes and epochs must be positive");
  }
  if (!(run.lr >= 0.0) || !(run.lr_final >= 0.0)) {
    throw ConfigurationError("learning rates must be non-negative");
  }
  if (!(run.beta1 >= 0.0 && run.beta1 < 1.0) || !(run.beta2 >= 0.0 && run.beta2 < 1.0) ||
      !(run.adam_eps > 0.0)) {
    throw ConfigurationError("beta1, beta2 must lie in [0, 1) and adam_eps must be positive");
  }
  if (!(run.loss.center >= 0.0) || !(run.loss.velocity >= 0.0) || !(run.loss.cls >= 0.0)) {
    throw ConfigurationError("loss weights must be non-negative");
  }
  if (run.eval_episodes == 0) throw ConfigurationError("eval_episodes must be positive");
  if (!(run.class_threshold >= 0.0 && run.class_threshold <= 1.0)) {
    throw ConfigurationError("class_threshold must lie in [0, 1]");
  }
  if (!(run.match_radius > 0.0)) throw ConfigurationError("match_radius must be positive");
  if (run.seeds == 0 || run.threads == 0) {
    throw ConfigurationError("seeds and threads must be positive");
  }
}

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

KeyGroup key_group(std::string_view key) {
  const auto keys = config_keys();
  const auto pos = [&](std::string_view k) {
    return static_cast<std::size_t>(std::find(keys.begin(), keys.end(), k) - keys.begin());
  };
  const std::size_t i = pos(key);
  if (i == keys.size()) throw ConfigurationError("unknown config key '" + std::string(key) + "'");
  if (i < pos("model_dim")) return KeyGroup::kScene;
  if (i < pos("episodes")) return KeyGroup::kDecoder;
  return KeyGroup::kRun;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, trim(value));
      return;
    }
  }
  throw ConfigurationError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != view.npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == view.npos) {
      throw ConfigurationError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_setting(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> resolved_settings(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(std::string(f.key), f.get(config));
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string code_version() { return std::string("streamrope ") + STREAMROPE_VERSION; }

}  // namespace streamrope::harness
