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

#include "forge/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "forge/error.hpp"
#include "forge/trace.hpp"

namespace forge {
namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

json weights_json(const RewardWeights& w) {
  return {{"accuracy", w.accuracy},
          {"format", w.format},
          {"reasoning_steps", w.reasoning_steps},
          {"process_3d", w.process_3d}};
}

}  // namespace

void RewardWeights::validate() const {
  for (double w : {accuracy, format, reasoning_steps, process_3d}) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidConfig("reward weights must be finite and >= 0");
  }
}

std::string_view to_string(RewardPreset p) {
  switch (p) {
    case RewardPreset::final: return "final";
    case RewardPreset::zero: return "zero";
    case RewardPreset::zero_3drwd: return "zero-3drwd";
  }
  return "final";
}

RewardPreset parse_preset(std::string_view text) {
  if (text == "final") return RewardPreset::final;
  if (text == "zero") return RewardPreset::zero;
  if (text == "zero-3drwd") return RewardPreset::zero_3drwd;
  throw InvalidConfig("unknown reward preset '" + std::string(text) + "'");
}

RewardWeights preset_weights(RewardPreset p) {
  if (p == RewardPreset::zero_3drwd) return RewardWeights{1.0, 1.0, 0.5, 0.5};
  return RewardWeights{};
}

std::map<QACategory, std::vector<std::string>> ProcessTermConfig::default_terms() {
  return {
      {QACategory::height, {"location", "height"}},
      {QACategory::location, {"location", "distance"}},
      {QACategory::orientation, {"orientation", "angle"}},
      {QACategory::multi_object, {"location", "distance"}},
      {QACategory::perception_location, {"location"}},
      {QACategory::perception_orientation, {"orientation"}},
      {QACategory::computation_distance, {"distance"}},
      {QACategory::computation_angle, {"angle"}},
  };
}

const std::vector<std::string>& ProcessTermConfig::for_category(QACategory c) const {
  auto it = terms.find(c);
  if (it == terms.end() || it->second.empty()) {
    throw Error("no process terms for category '" + std::string(to_string(c)) + "'");
  }
  return it->second;
}

void RewardConfig::validate() const {
  weights.validate();
  if (indicators.saturation == 0) throw InvalidConfig("indicator saturation must be >= 1");
}

nlohmann::json to_json(const RewardConfig& cfg) {
  json terms = json::object();
  for (const auto& [cat, list] : cfg.process.terms) terms[std::string(to_string(cat))] = list;
  return {{"weights", weights_json(cfg.weights)},
          {"indicators", cfg.indicators.indicators},
          {"saturation", cfg.indicators.saturation},
          {"process_terms", std::move(terms)},
          {"all_or_nothing", cfg.process.all_or_nothing}};
}

RewardConfig reward_config_from_json(const nlohmann::json& j) {
  RewardConfig cfg;
  if (j.contains("preset")) cfg.weights = preset_weights(parse_preset(j.at("preset").get<std::string>()));
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    cfg.weights.accuracy = w.value("accuracy", cfg.weights.accuracy);
    cfg.weights.format = w.value("format", cfg.weights.format);
    cfg.weights.reasoning_steps = w.value("reasoning_steps", cfg.weights.reasoning_steps);
    cfg.weights.process_3d = w.value("process_3d", cfg.weights.process_3d);
  }
  if (j.contains("indicators")) {
    cfg.indicators.indicators = j.at("indicators").get<std::vector<std::string>>();
  }
  cfg.indicators.saturation = j.value("saturation", cfg.indicators.saturation);
  if (j.contains("process_terms")) {
    cfg.process.terms.clear();
    for (const auto& [cat, list] : j.at("process_terms").items()) {
      cfg.process.terms[parse_category(cat)] = list.get<std::vector<std::string>>();
    }
  }
  cfg.process.all_or_nothing = j.value("all_or_nothing", false);
  cfg.validate();
  return cfg;
}

bool contains_word(std::string_view text, std::string_view word) {
  if (word.empty()) return false;
  const std::string hay = lower(text);
  const std::string needle = lower(word);
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || !word_char(hay[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == hay.size() || !word_char(hay[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

double accuracy_reward(std::string_view completion, const QARecord& record) {
  const auto answer = extract_answer(completion, record.options);
  return answer && *answer == record.answer ? 1.0 : 0.0;
}

double format_reward(std::string_view completion) { return is_well_formed(completion) ? 1.0 : 0.0; }

double reasoning_steps_reward(std::string_view completion, const IndicatorConfig& cfg) {
  if (cfg.saturation == 0) throw InvalidConfig("indicator saturation must be >= 1");
  std::set<std::string> found;
  for (const auto& ind : cfg.indicators) {
    if (contains_word(completion, ind)) found.insert(lower(ind));
  }
  return std::min(1.0, static_cast<double>(found.size()) / static_cast<double>(cfg.saturation));
}

double process_reward_3d(std::string_view completion, std::span<const std::string> required,
                         bool all_or_nothing) {
  if (required.empty()) throw Error("process reward needs at least one required term");
  const std::string thinking = thinking_content(completion);
  std::set<std::string> terms;
  for (const auto& t : required) terms.insert(lower(t));
  std::size_t hits = 0;
  for (const auto& t : terms) {
    if (contains_word(thinking, t)) ++hits;
  }
  if (all_or_nothing) return hits == terms.size() ? 1.0 : 0.0;
  return static_cast<double>(hits) / static_cast<double>(terms.size());
}

RewardBreakdown composite_reward(const RewardInputs& in, const RewardWeights& w) {
  w.validate();
  RewardBreakdown b;
  b.accuracy = in.accuracy;
  b.format = in.format;
  b.reasoning_steps = in.reasoning_steps;
  b.process_3d = in.process_3d;
  b.weights = w;
  b.composite = w.accuracy * in.accuracy + w.format * in.format +
                w.reasoning_steps * in.reasoning_steps + w.process_3d * in.process_3d;
  return b;
}

RewardBreakdown score_completion(std::string_view completion, const QARecord& record,
                                 const RewardConfig& cfg) {
  RewardInputs in;
  in.accuracy = accuracy_reward(completion, record);
  in.format = format_reward(completion);
  in.reasoning_steps = reasoning_steps_reward(completion, cfg.indicators);
  in.process_3d = process_reward_3d(completion, cfg.process.for_category(record.category),
                                    cfg.process.all_or_nothing);
  return composite_reward(in, cfg.weights);
}

nlohmann::json to_json(const RewardBreakdown& b) {
  return {{"accuracy", b.accuracy},
          {"format", b.format},
          {"reasoning_steps", b.reasoning_steps},
          {"process_3d", b.process_3d},
          {"composite", b.composite},
          {"weights", weights_json(b.weights)}};
}

void GrpoConfig::validate() const {
  if (group_size < 2) throw InvalidConfig("group size must be >= 2");
  if (!std::isfinite(kl_weight) || kl_weight < 0.0) throw InvalidConfig("kl weight must be >= 0");
  if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be positive");
}

AdvantageGroup grpo_advantages(std::span<const double> rewards, const GrpoConfig& cfg) {
  if (rewards.size() < 2) throw Error("a GRPO group needs at least 2 rewards");
  if (rewards.size() != cfg.group_size) {
    throw Error("expected " + std::to_string(cfg.group_size) + " rewards, got " +
                std::to_string(rewards.size()));
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std = std::sqrt(var / n);

  AdvantageGroup g{{rewards.begin(), rewards.end()}, std::vector<double>(rewards.size(), 0.0)};
  if (std > cfg.epsilon) {
    for (std::size_t i = 0; i < rewards.size(); ++i) g.advantages[i] = (rewards[i] - mean) / std;
  }
  return g;
}

double kl_penalty(double logprob_current, double logprob_reference, double kl_weight) {
  if (kl_weight == 0.0) return 0.0;
  const double d = logprob_reference - logprob_current;
  return kl_weight * std::max(0.0, std::expm1(d) - d);
}

}  // namespace forge
