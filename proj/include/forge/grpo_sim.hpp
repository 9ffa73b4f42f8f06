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

// Desk-scale GRPO loop over a toy softmax policy. A "completion" is a pair
// (trace template, answer option); rewards come from the real reward suite
// applied to the rendered text.

#include <cstdint>
#include <string>
#include <vector>

#include "forge/qa.hpp"
#include "forge/reward.hpp"

namespace forge {

/// Completion shapes the toy policy chooses between. They differ in format,
/// step indicators, spatial terms and length.
struct CompletionTemplate {
  std::string name;
  std::string pattern;  // "{X}" is replaced by the answer label
};

std::vector<CompletionTemplate> default_completion_templates();
std::string render_completion(const CompletionTemplate& t, char label);

class ToyPolicy {
 public:
  ToyPolicy(std::size_t questions, std::vector<std::size_t> options_per_question,
            std::size_t templates, double temperature);

  std::vector<double> answer_probs(std::size_t q) const;
  std::vector<double> template_probs(std::size_t q) const;

  std::vector<double>& answer_logits(std::size_t q) { return answer_logits_[q]; }
  std::vector<double>& template_logits(std::size_t q) { return template_logits_[q]; }
  double temperature() const { return temperature_; }

  friend bool operator==(const ToyPolicy&, const ToyPolicy&) = default;

 private:
  std::vector<std::vector<double>> answer_logits_;
  std::vector<std::vector<double>> template_logits_;
  double temperature_;
};

/// Softmax of logits / temperature.
std::vector<double> softmax(const std::vector<double>& logits, double temperature);

struct SimConfig {
  std::vector<QARecord> bank;
  std::size_t group_size = 8;
  std::size_t steps = 300;
  double learning_rate = 0.5;
  RewardPreset preset = RewardPreset::final;
  double kl_weight = 0.0;
  double temperature = 1.0;
  std::uint64_t seed = 1;
  std::vector<CompletionTemplate> templates = default_completion_templates();

  /// Throws InvalidConfig.
  void validate() const;
};

struct SimReport {
  std::vector<double> train_accuracy;   // mean sampled accuracy reward per step
  std::vector<double> policy_accuracy;  // expected accuracy of the policy after each step
  std::vector<double> mean_length;      // mean rendered length of sampled completions
  std::vector<double> mean_reward;      // mean composite reward of sampled completions
  std::vector<double> mean_kl;          // mean KL estimate of sampled completions
  double initial_accuracy = 0.0;
  double final_accuracy = 0.0;
  double max_abs_advantage_sum = 0.0;   // over all groups

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

SimReport run_simulation(const SimConfig& cfg);

/// `n` four-option distance questions over seeded random point pairs, with the
/// correct label spread uniformly over A-D.
std::vector<QARecord> toy_bank(std::size_t n, std::uint64_t seed);

/// Expected accuracy of `policy` on `bank` with the given templates.
double policy_accuracy(const ToyPolicy& policy, const std::vector<QARecord>& bank,
                       const std::vector<CompletionTemplate>& templates);

/// Tab-separated curves, one row per step, with a header line.
std::string report_to_tsv(const SimReport& report);

}  // namespace forge
