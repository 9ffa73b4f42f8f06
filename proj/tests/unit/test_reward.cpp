/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "forge/error.hpp"
#include "forge/qa.hpp"
#include "forge/reward.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace forge;

namespace {

QARecord record(QACategory category = QACategory::location) {
  QARecord r;
  r.record_id = "r";
  r.category = category;
  r.question_text = "Which is closer?";
  r.options = {{'A', "the chair (c1)", "c1"}, {'B', "the lamp (l2)", "l2"},
               {'C', "the sofa (s3)", "s3"}, {'D', "the dog (d4)", "d4"}};
  r.answer = 'B';
  return r;
}

}  // namespace

TEST_CASE("accuracy and format rewards") {
  const auto r = record();
  CHECK(accuracy_reward("<think>x</think><answer>B</answer>", r) == 1.0);
  CHECK(accuracy_reward("<think>x</think><answer>A</answer>", r) == 0.0);
  CHECK(accuracy_reward("so it is B.", r) == 1.0);
  CHECK(accuracy_reward("<answer>the lamp (l2)</answer>", r) == 1.0);
  CHECK(accuracy_reward("", r) == 0.0);
  CHECK(format_reward("<think>x</think><answer>B</answer>") == 1.0);
  CHECK(format_reward("<answer>B</answer>") == 0.0);
}

TEST_CASE("indicator reward saturates and matches whole words") {
  CHECK(reasoning_steps_reward("no structure") == 0.0);
  CHECK(reasoning_steps_reward("First, x. Then, y.") == doctest::Approx(2.0 / 3.0));
  CHECK(reasoning_steps_reward("First, Next, Then, Finally") == 1.0);
  CHECK(reasoning_steps_reward("first first FIRST") == doctest::Approx(1.0 / 3.0));
  CHECK(reasoning_steps_reward("Firstly, thenceforth") == 0.0);
  IndicatorConfig one;
  one.saturation = 1;
  CHECK(reasoning_steps_reward("Then", one) == 1.0);
  one.saturation = 0;
  CHECK_THROWS_AS(reasoning_steps_reward("Then", one), InvalidConfig);
}

TEST_CASE("process reward reads the thinking block") {
  const std::vector<std::string> terms{"location", "distance"};
  CHECK(process_reward_3d("<think>the location and distance</think><answer>A</answer>", terms) == 1.0);
  CHECK(process_reward_3d("<think>the location</think><answer>distance</answer>", terms) == 0.5);
  CHECK(process_reward_3d("plain location text", terms) == 0.5);
  CHECK(process_reward_3d("<think>the location</think>", terms, true) == 0.0);
  CHECK(process_reward_3d("<think>Distances</think>", terms) == 0.0);
  CHECK_THROWS_AS(process_reward_3d("x", std::vector<std::string>{}), Error);
  CHECK(contains_word("Bearing of the camera", "of the"));
  CHECK_FALSE(contains_word("location_x", "location"));
}

TEST_CASE("presets and composite weights") {
  CHECK(preset_weights(RewardPreset::final) == RewardWeights{1, 1, 0, 0});
  CHECK(preset_weights(RewardPreset::zero) == RewardWeights{1, 1, 0, 0});
  CHECK(preset_weights(RewardPreset::zero_3drwd) == RewardWeights{1, 1, 0.5, 0.5});
  CHECK(parse_preset("zero-3drwd") == RewardPreset::zero_3drwd);
  CHECK_THROWS_AS(parse_preset("zero_3d"), InvalidConfig);

  const auto b = composite_reward({1, 1, 0.5, 0.25}, {1, 2, 3, 4});
  CHECK(b.composite == doctest::Approx(1 + 2 + 1.5 + 1));
  CHECK_THROWS_AS(composite_reward({}, {-1, 0, 0, 0}), InvalidConfig);
  CHECK_THROWS_AS(composite_reward({}, {NAN, 0, 0, 0}), InvalidConfig);
}

TEST_CASE("composite is monotone in every component") {
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    const RewardWeights w{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)};
    RewardInputs in{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    const double base = composite_reward(in, w).composite;
    RewardInputs up = in;
    switch (rng.index(4)) {
      case 0: up.accuracy += rng.uniform(); break;
      case 1: up.format += rng.uniform(); break;
      case 2: up.reasoning_steps += rng.uniform(); break;
      default: up.process_3d += rng.uniform();
    }
    CHECK(composite_reward(up, w).composite >= base);
  }
}

TEST_CASE("component rewards stay in range on fuzzed text") {
  Rng rng(77);
  const RewardConfig cfg{preset_weights(RewardPreset::zero_3drwd), {}, {}};
  for (int i = 0; i < 3000; ++i) {
    const std::string text = gen::completion_text(rng);
    const auto r = record(static_cast<QACategory>(rng.index(8)));
    const auto b = score_completion(text, r, cfg);
    CHECK((b.accuracy == 0.0 || b.accuracy == 1.0));
    CHECK((b.format == 0.0 || b.format == 1.0));
    CHECK(b.reasoning_steps >= 0.0);
    CHECK(b.reasoning_steps <= 1.0);
    CHECK(b.process_3d >= 0.0);
    CHECK(b.process_3d <= 1.0);
    CHECK(b.composite >= 0.0);
    CHECK(b.composite <= 3.0);
  }
}

TEST_CASE("accuracy is invariant under option permutation with remapped answers") {
  Rng rng(4);
  const auto base = record();
  for (int i = 0; i < 300; ++i) {
    QARecord p = base;
    rng.shuffle(p.options);
    const std::string key = base.answer_option()->key;
    relabel(p.options);
    p.answer = p.option_with_key(key)->label;
    const auto orig_label_of = [&](char l) {
      for (const auto& o : p.options) {
        if (o.label == l) return base.option_with_key(o.key)->label;
      }
      return 'X';
    };
    const char pick = "ABCD"[rng.index(4)];
    const std::string completion = std::string("<think>x</think><answer>") + pick + "</answer>";
    const std::string orig = std::string("<think>x</think><answer>") + orig_label_of(pick) + "</answer>";
    CHECK(accuracy_reward(completion, p) == accuracy_reward(orig, base));
  }
}

TEST_CASE("advantages: exact small case and degenerate groups") {
  GrpoConfig cfg;
  cfg.group_size = 4;
  const std::vector<double> r{1, 0, 0, 1};
  const auto g = grpo_advantages(r, cfg);
  CHECK(g.advantages == std::vector<double>{1, -1, -1, 1});
  CHECK(grpo_advantages(std::vector<double>{2, 2, 2, 2}, cfg).advantages ==
        std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(grpo_advantages(std::vector<double>{1, 0, 0}, cfg), Error);
  cfg.group_size = 1;
  CHECK_THROWS_AS(grpo_advantages(std::vector<double>{1}, cfg), Error);
}

TEST_CASE("advantages match the statistics oracle and are shift and scale invariant") {
  Rng rng(19);
  for (int i = 0; i < 1000; ++i) {
    GrpoConfig cfg;
    cfg.group_size = 2 + rng.index(15);
    const auto r = gen::reward_group(rng, cfg.group_size);
    const auto g = grpo_advantages(r, cfg);
    const auto st = oracle::population_stats(r);
    double sum = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double expected =
          st.std > 1e-8L ? static_cast<double>((r[k] - st.mean) / st.std) : 0.0;
      CHECK(std::abs(g.advantages[k] - expected) <= 1e-12);
      sum += g.advantages[k];
    }
    CHECK(std::abs(sum) <= 1e-9);

    const double shift = rng.uniform(-5, 5);
    const double scale = rng.uniform(0.1, 10);
    std::vector<double> moved(r), scaled(r);
    for (auto& x : moved) x += shift;
    for (auto& x : scaled) x *= scale;
    const auto gm = grpo_advantages(moved, cfg);
    const auto gs = grpo_advantages(scaled, cfg);
    for (std::size_t k = 0; k < r.size(); ++k) {
      CHECK(gm.advantages[k] == doctest::Approx(g.advantages[k]).epsilon(1e-6));
      CHECK(gs.advantages[k] == doctest::Approx(g.advantages[k]).epsilon(1e-6));
    }
  }
}

TEST_CASE("kl penalty matches the ratio form and is non-negative") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double cur = rng.uniform(-6, 0);
    const double ref = rng.uniform(-6, 0);
    const double w = rng.uniform(0, 1);
    const double got = kl_penalty(cur, ref, w);
    CHECK(got >= 0.0);
    CHECK(got == doctest::Approx(oracle::k3_ratio(cur, ref, w)).epsilon(1e-9).scale(1e-9));
  }
  CHECK(kl_penalty(-1, -1, 0.04) == 0.0);
  CHECK(kl_penalty(-1, -3, 0.0) == 0.0);
}

TEST_CASE("reward config round-trips through JSON") {
  RewardConfig cfg;
  cfg.weights = preset_weights(RewardPreset::zero_3drwd);
  cfg.indicators.saturation = 4;
  cfg.process.all_or_nothing = true;
  const auto back = reward_config_from_json(to_json(cfg));
  CHECK(back.weights == cfg.weights);
  CHECK(back.indicators.saturation == 4);
  CHECK(back.indicators.indicators == cfg.indicators.indicators);
  CHECK(back.process.terms == cfg.process.terms);
  CHECK(back.process.all_or_nothing);
  const auto j = to_json(score_completion("<think>First</think><answer>B</answer>", record(), cfg));
  CHECK(j.at("weights").at("process_3d") == 0.5);
}
