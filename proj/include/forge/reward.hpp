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

#pragma once

// Rule-based rewards and GRPO group advantages.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/qa.hpp"

namespace forge {

struct RewardWeights {
  double accuracy = 1.0;
  double format = 1.0;
  double reasoning_steps = 0.0;
  double process_3d = 0.0;

  /// Throws InvalidConfig for negative or non-finite weights.
  void validate() const;

  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

enum class RewardPreset { final, zero, zero_3drwd };

std::string_view to_string(RewardPreset p);
RewardPreset parse_preset(std::string_view text);
RewardWeights preset_weights(RewardPreset p);

struct IndicatorConfig {
  std::vector<std::string> indicators{"First", "Second", "Next", "Then", "Finally"};
  std::size_t saturation = 3;
};

struct ProcessTermConfig {
  std::map<QACategory, std::vector<std::string>> terms = default_terms();
  bool all_or_nothing = false;

  static std::map<QACategory, std::vector<std::string>> default_terms();
  /// Throws Error when the category has no configured terms.
  const std::vector<std::string>& for_category(QACategory c) const;
};

struct RewardConfig {
  RewardWeights weights;
  IndicatorConfig indicators;
  ProcessTermConfig process;

  void validate() const;
};

nlohmann::json to_json(const RewardConfig& cfg);
RewardConfig reward_config_from_json(const nlohmann::json& j);

/// Case-insensitive whole-word (or whole-phrase) occurrence.
bool contains_word(std::string_view text, std::string_view word);

double accuracy_reward(std::string_view completion, const QARecord& record);
double format_reward(std::string_view completion);
double reasoning_steps_reward(std::string_view completion, const IndicatorConfig& cfg = {});
/// Fraction of `required` found in the thinking block. Throws Error when empty.
double process_reward_3d(std::string_view completion, std::span<const std::string> required,
                         bool all_or_nothing = false);

struct RewardInputs {
  double accuracy = 0.0;
  double format = 0.0;
  double reasoning_steps = 0.0;
  double process_3d = 0.0;
};

struct RewardBreakdown {
  double accuracy = 0.0;
  double format = 0.0;
  double reasoning_steps = 0.0;
  double process_3d = 0.0;
  double composite = 0.0;
  RewardWeights weights;
};

RewardBreakdown composite_reward(const RewardInputs& inputs, const RewardWeights& weights = {});

/// All four components for one completion of `record`, combined with cfg.weights.
RewardBreakdown score_completion(std::string_view completion, const QARecord& record,
                                 const RewardConfig& cfg = {});

nlohmann::json to_json(const RewardBreakdown& b);

struct GrpoConfig {
  std::size_t group_size = 8;
  double kl_weight = 0.0;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdvantageGroup {
  std::vector<double> rewards;
  std::vector<double> advantages;
};

/// (r_i - mean) / population_std, or all zeros when std <= epsilon.
/// Throws Error when |rewards| != group_size or group_size < 2.
AdvantageGroup grpo_advantages(std::span<const double> rewards, const GrpoConfig& cfg);

/// kl_weight * (exp(ref - cur) - (ref - cur) - 1).
double kl_penalty(double logprob_current, double logprob_reference, double kl_weight);

}  // namespace forge
