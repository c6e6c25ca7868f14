// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "streamrope/harness/ablation.hpp"
#include "streamrope/harness/config.hpp"
#include "streamrope/harness/evaluation.hpp"
#include "streamrope/harness/io.hpp"
#include "streamrope/harness/optimizer.hpp"
#include "streamrope/harness/training.hpp"
#include "streamrope/numerics/errors.hpp"

namespace streamrope::harness {
namespace {

using numerics::DenseMatrix;

RunConfig tiny_config() {
  RunConfig c;
  c.scene.grid_n = 6;
  c.scene.frames = 4;
  c.scene.token_feature_dim = 32;
  c.decoder.model_dim = 32;
  c.decoder.heads = 2;
  c.decoder.ffn_dim = 48;
  c.decoder.n_queries = 9;
  c.decoder.memory_capacity = 16;
  c.run.episodes = 6;
  c.run.epochs = 2;
  c.run.eval_episodes = 4;
  c.run.seeds = 2;
  c.run.seed = 3;
  return c;
}

TEST(Adam, FirstTwoStepsMatchHandComputation) {
  numerics::ParameterStore store;
  numerics::Parameter& w = store.create("w", DenseMatrix{{1.0, -2.0}});
  Adam adam(store);
  w.grad = DenseMatrix{{0.5, -4.0}};
  adam.step(0.1);
  // Bias-corrected first step moves by lr * g / (|g| + eps).
  EXPECT_NEAR(w.value(0, 0), 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(w.value(0, 1), -2.0 + 0.1 * 4.0 / (4.0 + 1e-8), 1e-15);

  w.grad = DenseMatrix{{0.25, 0.0}};
  const double before = w.value(0, 0);
  adam.step(0.1);
  const double m = 0.9 * (0.1 * 0.5) + 0.1 * 0.25;
  const double v = 0.999 * (0.001 * 0.25) + 0.001 * 0.0625;
  const double m_hat = m / (1 - 0.81);
  const double v_hat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(w.value(0, 0), before - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-15);
  EXPECT_EQ(adam.steps_taken(), 2u);
}

TEST(Adam, ZeroLearningRateLeavesWeights) {
  numerics::ParameterStore store;
  numerics::Parameter& w = store.create("w", DenseMatrix{{0.1234567, -2.5}});
  const DenseMatrix before = w.value;
  Adam adam(store);
  w.grad = DenseMatrix{{3.0, -1.0}};
  for (int i = 0; i < 5; ++i) adam.step(0.0);
  EXPECT_EQ(w.value, before);
}

TEST(CosineLr, Endpoints) {
  EXPECT_EQ(cosine_lr(1e-3, 1e-5, 0, 100), 1e-3);
  EXPECT_NEAR(cosine_lr(1e-3, 1e-5, 99, 100), 1e-5, 1e-18);
  EXPECT_NEAR(cosine_lr(1e-3, 1e-5, 50, 101), (1e-3 + 1e-5) / 2, 1e-15);
  double prev = 1.0;
  for (std::size_t s = 0; s < 100; ++s) {
    const double lr = cosine_lr(1e-3, 1e-5, s, 100);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
  EXPECT_EQ(cosine_lr(1e-3, 1e-5, 0, 1), 1e-3);
}

TEST(Config, ParsesKeysCommentsAndWhitespace) {
  std::istringstream in(
      "# comment\n"
      "\n"
      "  episodes = 12   # trailing\n"
      "embedding_mode=rope_spatial\n"
      "pairs_t = 4\npairs_x = 2\npairs_y = 2\n"
      "rope_cross = false\n"
      "lr = 2.5e-4\n"
      "variants = none, learnable ,mrope_spatiotemporal;pairs_t=0;pairs_x=4;pairs_y=4\n"
      "seed = 18446744073709551615\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.run.episodes, 12u);
  EXPECT_EQ(c.decoder.embedding_mode, decoder::EmbeddingMode::kRopeSpatial);
  EXPECT_EQ(c.decoder.partition, (embeddings::ChannelPartition{4, 2, 2}));
  EXPECT_FALSE(c.decoder.rope_cross);
  EXPECT_EQ(c.run.lr, 2.5e-4);
  EXPECT_EQ(c.run.variants.size(), 3u);
  EXPECT_EQ(c.run.variants[1], "learnable");
  EXPECT_EQ(c.run.seed, std::numeric_limits<std::uint64_t>::max());
}

TEST(Config, UnknownKeyIsAnError) {
  std::istringstream in("episodes = 3\nepisode = 4\n");
  EXPECT_THROW(parse_config(in), ConfigurationError);
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "scene.seed", "1"), ConfigurationError);
}

TEST(Config, MalformedValuesAreErrors) {
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "episodes", "-3"), ConfigurationError);
  EXPECT_THROW(apply_setting(c, "episodes", "3.5"), ConfigurationError);
  EXPECT_THROW(apply_setting(c, "lr", "fast"), ConfigurationError);
  EXPECT_THROW(apply_setting(c, "rope_self", "yes"), ConfigurationError);
  EXPECT_THROW(apply_setting(c, "embedding_mode", "alibi"), ConfigurationError);
  std::istringstream no_equals("episodes 3\n");
  EXPECT_THROW(parse_config(no_equals), ConfigurationError);
}

TEST(Config, ResolvedSettingsRoundTrip) {
  RunConfig c = tiny_config();
  c.run.lr = 0.1 + 0.2;  // not representable in few digits
  c.decoder.time_scale = 17.25;
  c.decoder.memory_restamp = true;
  std::ostringstream text;
  for (const auto& [k, v] : resolved_settings(c)) text << k << " = " << v << '\n';
  std::istringstream in(text.str());
  const RunConfig back = parse_config(in);
  EXPECT_EQ(resolved_settings(back), resolved_settings(c));
  EXPECT_EQ(back.run.lr, c.run.lr);
  EXPECT_EQ(resolved_settings(c).size(), config_keys().size());
}

TEST(Config, KeyGroups) {
  EXPECT_EQ(key_group("grid_n"), KeyGroup::kScene);
  EXPECT_EQ(key_group("pairs_t"), KeyGroup::kDecoder);
  EXPECT_EQ(key_group("time_scale"), KeyGroup::kDecoder);
  EXPECT_EQ(key_group("episodes"), KeyGroup::kRun);
  EXPECT_THROW(key_group("nope"), ConfigurationError);
}

TEST(Config, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.scene.token_feature_dim = 32;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = RunConfig{};
  c.run.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = RunConfig{};
  c.run.class_threshold = 1.5;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = RunConfig{};
  EXPECT_EQ(c.final_lr(), 1e-5);
  c.run.lr = 0.0;
  EXPECT_EQ(c.final_lr(), 0.0);
}

TEST(Seeds, TrainingAndEvaluationStreamsAreDisjoint) {
  std::set<std::uint64_t> train;
  for (std::size_t i = 0; i < 2000; ++i) train.insert(train_episode_seed(0, i));
  EXPECT_EQ(train.size(), 2000u);
  for (std::size_t i = 0; i < 2000; ++i) EXPECT_FALSE(train.count(eval_episode_seed(0, i)));
  EXPECT_NE(train_episode_seed(0, 0), train_episode_seed(1, 0));
}

TEST(Training, ZeroLearningRateKeepsWeightsBitwise) {
  RunConfig c = tiny_config();
  c.decoder.zero_init_heads = false;
  c.run.lr = 0.0;
  const TrainResult r = train(c);
  const decoder::StreamingDecoder fresh = make_model(c);
  ASSERT_EQ(r.model.parameters().size(), fresh.parameters().size());
  for (std::size_t i = 0; i < fresh.parameters().size(); ++i) {
    EXPECT_EQ(r.model.parameters()[i].value, fresh.parameters()[i].value)
        << fresh.parameters()[i].name;
  }
}

TEST(Training, RepeatedRunsGiveIdenticalLogs) {
  const RunConfig c = tiny_config();
  const TrainResult a = train(c);
  const TrainResult b = train(c);
  std::ostringstream la;
  std::ostringstream lb;
  write_training_log(la, a.log);
  write_training_log(lb, b.log);
  EXPECT_EQ(la.str(), lb.str());
  std::ostringstream wa;
  std::ostringstream wb;
  write_parameters(wa, a.model.parameters());
  write_parameters(wb, b.model.parameters());
  EXPECT_EQ(wa.str(), wb.str());
}

TEST(Training, EveryEpochVisitsEveryEpisodeOnce) {
  const RunConfig c = tiny_config();
  const EpisodeSet data = make_training_set(c);
  const TrainResult r = train(c, data);
  ASSERT_EQ(r.log.size(), c.run.epochs);
  ASSERT_EQ(r.consumed_seeds.size(), c.run.episodes * c.run.epochs);
  const std::multiset<std::uint64_t> expected(data.seeds.begin(), data.seeds.end());
  for (std::size_t e = 0; e < c.run.epochs; ++e) {
    const auto begin = r.consumed_seeds.begin() + static_cast<std::ptrdiff_t>(e * c.run.episodes);
    const std::multiset<std::uint64_t> seen(begin, begin + static_cast<std::ptrdiff_t>(c.run.episodes));
    EXPECT_EQ(seen, expected);
  }
  EXPECT_NEAR(r.log.back().lr, c.final_lr(), 1e-15);
}

TEST(Training, LossDecreases) {
  RunConfig c = tiny_config();
  c.run.episodes = 12;
  c.run.epochs = 6;
  c.run.lr = 3e-3;
  const TrainResult r = train(c);
  EXPECT_LT(r.log.back().mean_loss, r.log.front().mean_loss);
}

TEST(Training, NonFiniteLossNamesTheEpisode) {
  RunConfig c = tiny_config();
  c.run.loss.center = std::numeric_limits<double>::infinity();
  const EpisodeSet data = make_training_set(c);
  try {
    train(c, data);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    bool named = false;
    for (const auto s : data.seeds) named = named || msg.find(std::to_string(s)) != msg.npos;
    EXPECT_TRUE(named) << msg;
  }
}

TEST(Evaluation, OracleIsPerfect) {
  const RunConfig c = tiny_config();
  const EpisodeSet eval = make_eval_set(c);
  const Metrics m = evaluate_predictor(oracle_predictor(), eval.episodes, 0.5, 2.0);
  EXPECT_EQ(m.center_mae, 0.0);
  EXPECT_EQ(m.velocity_mae, 0.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  // Frame 0 is skipped.
  EXPECT_EQ(m.ground_truth, eval.episodes.size() * (c.scene.frames - 1) * c.scene.n_objects);
}

TEST(Evaluation, SilentPredictorGivesSentinels) {
  const RunConfig c = tiny_config();
  const EpisodeSet eval = make_eval_set(c);
  const Predictor silent = [](const scenes::Episode& e) {
    std::vector<std::vector<decoder::Detection>> out(e.size());
    for (auto& f : out) f.assign(5, decoder::Detection{{0, 0}, {0, 0}, 0.0});
    return out;
  };
  const Metrics m = evaluate_predictor(silent, eval.episodes, 0.5, 2.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.matches, 0u);
  EXPECT_EQ(m.center_mae, kUndefinedMetric);
  EXPECT_EQ(m.velocity_mae, kUndefinedMetric);
  EXPECT_EQ(m.precision, 0.0);
}

TEST(Evaluation, DistanceAndThresholdGates) {
  const RunConfig c = tiny_config();
  const EpisodeSet eval = make_eval_set(c);
  const auto shifted = [](double dx, double prob) -> Predictor {
    return [=](const scenes::Episode& e) {
      std::vector<std::vector<decoder::Detection>> out;
      for (const auto& f : e) {
        auto& d = out.emplace_back();
        for (const auto& o : f.objects)
          d.push_back({{o.center.x + dx, o.center.y}, {o.velocity.x + 0.5, o.velocity.y}, prob});
      }
      return out;
    };
  };
  const Metrics near = evaluate_predictor(shifted(1.5, 0.9), eval.episodes, 0.5, 2.0);
  EXPECT_NEAR(near.center_mae, 1.5, 1e-12);
  EXPECT_NEAR(near.velocity_mae, 0.5, 1e-12);
  EXPECT_EQ(near.recall, 1.0);
  const Metrics far = evaluate_predictor(shifted(2.5, 0.9), eval.episodes, 0.5, 2.0);
  EXPECT_EQ(far.matches, 0u);
  EXPECT_EQ(far.precision, 0.0);
  const Metrics unsure = evaluate_predictor(shifted(0.0, 0.49), eval.episodes, 0.5, 2.0);
  EXPECT_EQ(unsure.predictions, 0u);
}

TEST(Evaluation, PureFunctionOfWeightsAndConfig) {
  RunConfig c = tiny_config();
  c.decoder.zero_init_heads = false;
  c.run.class_threshold = 0.0;
  c.run.match_radius = 100.0;
  const decoder::StreamingDecoder model = make_model(c);
  const Metrics a = evaluate(model, c);
  const Metrics b = evaluate(model, c);
  EXPECT_EQ(a, b);
  EXPECT_GT(a.matches, 0u);
  EXPECT_GE(a.precision, 0.0);
  EXPECT_LE(a.precision, 1.0);
}

TEST(Ablation, RepeatedRunsGiveIdenticalRows) {
  const RunConfig c = tiny_config();
  const AblationResult a = run_ablation(c, {"none"});
  const AblationResult b = run_ablation(c, {"none"});
  std::ostringstream ta;
  std::ostringstream tb;
  write_metrics_csv(ta, a.rows);
  write_metrics_csv(tb, b.rows);
  EXPECT_EQ(ta.str(), tb.str());
  ASSERT_EQ(a.rows.size(), c.run.seeds + 1);
  EXPECT_EQ(a.rows.back().seed, "mean");
}

TEST(Ablation, SpatialRotaryEqualsTemporalFreePartition) {
  const RunConfig c = tiny_config();
  const AblationResult r =
      run_ablation(c, {"rope_spatial", "mrope_spatiotemporal;pairs_t=0;pairs_x=4;pairs_y=4;time_scale=3"});
  const std::size_t per_variant = c.run.seeds + 1;
  ASSERT_EQ(r.rows.size(), 2 * per_variant);
  for (std::size_t i = 0; i < per_variant; ++i) {
    const Metrics& a = r.rows[i].metrics;
    const Metrics& b = r.rows[per_variant + i].metrics;
    EXPECT_NEAR(a.center_mae, b.center_mae, 1e-9);
    EXPECT_NEAR(a.velocity_mae, b.velocity_mae, 1e-9);
    EXPECT_NEAR(a.precision, b.precision, 1e-9);
    EXPECT_NEAR(a.recall, b.recall, 1e-9);
    EXPECT_EQ(a.matches, b.matches);
  }
}

TEST(Ablation, ParallelRunsMatchSerial) {
  RunConfig c = tiny_config();
  c.run.seeds = 1;
  const AblationResult serial = run_ablation(c, {"none", "learnable", "sinusoidal_additive"});
  c.run.threads = 3;
  const AblationResult parallel = run_ablation(c, {"none", "learnable", "sinusoidal_additive"});
  ASSERT_EQ(serial.rows.size(), parallel.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    EXPECT_EQ(serial.rows[i].metrics, parallel.rows[i].metrics);
  }
  EXPECT_EQ(serial.consumed_seeds, parallel.consumed_seeds);
}

TEST(Ablation, VariantParsing) {
  const RunConfig base;
  const RunConfig v = apply_variant(base, "mrope_spatiotemporal;pairs_t=4;pairs_x=2;pairs_y=2;time_scale=16");
  EXPECT_EQ(v.decoder.partition, (embeddings::ChannelPartition{4, 2, 2}));
  EXPECT_EQ(v.decoder.time_scale, 16.0);
  EXPECT_EQ(apply_variant(base, "none").decoder.embedding_mode, decoder::EmbeddingMode::kNone);
  EXPECT_THROW(apply_variant(base, "mrope_spatiotemporal;episodes=3"), ConfigurationError);
  EXPECT_THROW(apply_variant(base, "mrope_spatiotemporal;pairs_t"), ConfigurationError);
  EXPECT_THROW(apply_variant(base, "mrope_spatiotemporal;pairs_t=1"), ConfigurationError);
  EXPECT_THROW(apply_variant(base, "fourier"), ConfigurationError);
}

TEST(Ablation, MeanRow) {
  Metrics a;
  a.center_mae = 1.0;
  a.velocity_mae = 2.0;
  a.precision = 0.5;
  a.recall = 0.25;
  a.matches = 4;
  Metrics b;  // nothing matched
  b.precision = 0.0;
  b.recall = 0.0;
  const Metrics m = mean_metrics({a, b});
  EXPECT_EQ(m.center_mae, 1.0);
  EXPECT_EQ(m.velocity_mae, 2.0);
  EXPECT_EQ(m.precision, 0.25);
  EXPECT_EQ(m.recall, 0.125);
  EXPECT_EQ(m.matches, 4u);
  EXPECT_EQ(mean_metrics({b}).center_mae, kUndefinedMetric);
}

TEST(Io, ParametersRoundTripExactly) {
  RunConfig c = tiny_config();
  c.decoder.zero_init_heads = false;
  c.decoder.embedding_mode = decoder::EmbeddingMode::kLearnable;
  const decoder::StreamingDecoder model = make_model(c);
  std::stringstream buf;
  write_parameters(buf, model.parameters());
  const numerics::ParameterStore back = read_parameters(buf);
  ASSERT_EQ(back.size(), model.parameters().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].name, model.parameters()[i].name);
    EXPECT_EQ(back[i].value, model.parameters()[i].value);
  }
  decoder::StreamingDecoder other = make_model(tiny_config());
  EXPECT_THROW(other.load_parameters(back), ConfigurationError);
}

TEST(Io, MalformedWeightsThrow) {
  std::istringstream bad("parameter w 1 2\n0.5 nope\n");
  EXPECT_THROW(read_parameters(bad), ConfigurationError);
  std::istringstream truncated("parameter w 1 2\n0.5\n");
  EXPECT_THROW(read_parameters(truncated), ConfigurationError);
}

TEST(Io, MetricsCsvLayout) {
  Metrics m;
  m.center_mae = 0.5;
  m.velocity_mae = 0.25;
  m.precision = 1.0;
  m.recall = 0.75;
  m.matches = 3;
  m.predictions = 3;
  m.ground_truth = 4;
  std::ostringstream out;
  write_metrics_csv(out, {{"mrope_spatiotemporal", "7", m}, {"none", "mean", Metrics{}}});
  EXPECT_EQ(out.str(),
            "variant,seed,center_mae,velocity_mae,precision,recall,matches,predictions,"
            "ground_truth\n"
            "mrope_spatiotemporal,7,0.5,0.25,1,0.75,3,3,4\n"
            "none,mean,-1,-1,0,0,0,0,0\n");
}

TEST(Io, ManifestListsEverySetting) {
  const RunConfig c;
  std::ostringstream out;
  write_manifest(out, c, "train", {{"variant", "none"}});
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("code_version = streamrope ", 0), 0u);
  for (const auto key : config_keys()) {
    EXPECT_NE(text.find("\n" + std::string(key) + " = "), std::string::npos) << key;
  }
  EXPECT_NE(text.find("\nvariant = none\n"), std::string::npos);
}

}  // namespace
}  // namespace streamrope::harness
