// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamrope/harness/ablation.hpp"
#include "streamrope/harness/checks.hpp"
#include "streamrope/harness/config.hpp"
#include "streamrope/harness/evaluation.hpp"
#include "streamrope/harness/io.hpp"
#include "streamrope/harness/training.hpp"
#include "streamrope/numerics/errors.hpp"

namespace fs = std::filesystem;
using namespace streamrope;
using namespace streamrope::harness;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::vector<std::string> variants;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> epochs;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "flat key = value config file");
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--variant", o.variants,
                  "embedding mode with optional ';key=value' decoder overrides");
  cmd->add_option("--episodes", o.episodes, "training episodes (episode files for gen)");
  cmd->add_option("--epochs", o.epochs, "training epochs");
}

RunConfig resolve(const Options& o, bool single_variant) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) c.run.seed = *o.seed;
  if (o.episodes) c.run.episodes = *o.episodes;
  if (o.epochs) c.run.epochs = *o.epochs;
  if (single_variant) {
    if (o.variants.size() > 1) throw ConfigurationError("--variant given more than once");
    if (!o.variants.empty()) c = apply_variant(c, o.variants.front());
  } else if (!o.variants.empty()) {
    c.run.variants = o.variants;
  }
  c.validate();
  return c;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  return out;
}

std::string label(const RunConfig& c, const Options& o) {
  return o.variants.empty() ? std::string(decoder::to_string(c.decoder.embedding_mode))
                            : o.variants.front();
}

int run_gen(const Options& o) {
  const RunConfig c = resolve(o, true);
  fs::create_directories(o.out);
  for (std::size_t i = 0; i < c.run.episodes; ++i) {
    scenes::SceneConfig sc = c.scene;
    sc.seed = train_episode_seed(c.run.seed, i);
    char name[32];
    std::snprintf(name, sizeof(name), "episode_%05zu.txt", i);
    auto out = open_out(fs::path(o.out) / name);
    scenes::write_episode(out, sc, scenes::generate_episode(sc));
  }
  auto manifest = open_out(fs::path(o.out) / "manifest.txt");
  write_manifest(manifest, c, "gen");
  std::cout << "wrote " << c.run.episodes << " episodes to " << o.out << '\n';
  return 0;
}

int run_train(const Options& o) {
  const RunConfig c = resolve(o, true);
  fs::create_directories(o.out);
  const TrainResult result = train(c);
  {
    auto out = open_out(fs::path(o.out) / "weights.txt");
    write_parameters(out, result.model.parameters());
  }
  {
    auto out = open_out(fs::path(o.out) / "training_log.csv");
    write_training_log(out, result.log);
  }
  auto manifest = open_out(fs::path(o.out) / "manifest.txt");
  write_manifest(manifest, c, "train",
                 {{"variant", label(c, o)},
                  {"first_epoch_loss", format_double(result.log.front().mean_loss)},
                  {"final_epoch_loss", format_double(result.log.back().mean_loss)},
                  {"optimizer_steps", std::to_string(result.consumed_seeds.size())}});
  std::cout << "epoch 0 loss " << format_double(result.log.front().mean_loss) << ", epoch "
            << result.log.back().epoch << " loss " << format_double(result.log.back().mean_loss)
            << '\n';
  return 0;
}

int run_eval(const Options& o) {
  const RunConfig c = resolve(o, true);
  decoder::StreamingDecoder model = make_model(c);
  std::ifstream in(fs::path(o.out) / "weights.txt");
  if (!in) throw ConfigurationError("no weights.txt in " + o.out + "; run train first");
  model.load_parameters(read_parameters(in));
  const Metrics m = evaluate(model, c);
  const std::vector<MetricsRow> rows{{label(c, o), std::to_string(c.run.seed), m}};
  {
    auto out = open_out(fs::path(o.out) / "metrics.csv");
    write_metrics_csv(out, rows);
  }
  auto manifest = open_out(fs::path(o.out) / "eval_manifest.txt");
  write_manifest(manifest, c, "eval", {{"variant", label(c, o)}});
  write_metrics_csv(std::cout, rows);
  return 0;
}

int run_ablate(const Options& o) {
  const RunConfig c = resolve(o, false);
  fs::create_directories(o.out);
  const AblationResult result = run_ablation(
      c, c.run.variants, [](const std::string& line) { std::cerr << line << std::endl; });
  {
    auto out = open_out(fs::path(o.out) / "ablation.csv");
    write_metrics_csv(out, result.rows);
  }
  {
    auto out = open_out(fs::path(o.out) / "episode_seeds.txt");
    for (std::size_t s = 0; s < result.consumed_seeds.size(); ++s) {
      out << "run_seed " << c.run.seed + s << ':';
      for (const auto seed : result.consumed_seeds[s]) out << ' ' << seed;
      out << '\n';
    }
  }
  auto manifest = open_out(fs::path(o.out) / "manifest.txt");
  write_manifest(manifest, c, "ablate");
  write_metrics_csv(std::cout, result.rows);
  return 0;
}

int run_check(const Options& o) {
  const RunConfig c = resolve(o, true);
  const auto results = run_check_suite(c, c.run.seed);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-26s %s  cases=%zu worst=%.3e tol=%.1e time=%.2fs limit=%.0fs %s\n",
                r.name.c_str(), r.passed() ? "PASS" : "FAIL", r.cases, r.measured, r.tolerance,
                r.seconds, r.time_limit, r.detail.c_str());
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotary spatio-temporal embeddings in a streaming BEV query decoder"};
  app.require_subcommand(1);
  Options o;
  int (*handler)(const Options&) = nullptr;
  const std::pair<const char*, int (*)(const Options&)> commands[] = {
      {"gen", run_gen},     {"train", run_train}, {"eval", run_eval},
      {"ablate", run_ablate}, {"check", run_check},
  };
  const char* help[] = {"write training episodes as text files",
                        "train a decoder and write weights, log and manifest",
                        "evaluate <out>/weights.txt on held-out episodes",
                        "train and evaluate every variant over several seeds",
                        "run the rotary, shift, gradient and matcher checks"};
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i].first, help[i]);
    add_common(cmd, o);
    cmd->callback([&handler, fn = commands[i].second] { handler = fn; });
  }
  CLI11_PARSE(app, argc, argv);
  try {
    return handler(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
