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

#include "forge/grpo_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {
namespace {

struct SampleOutcome {
  double accuracy = 0.0;
  double reward = 0.0;
  double length = 0.0;
};

std::size_t sample(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

// Gradient of log softmax(logits / T)[k] is (onehot(k) - p) / T.
void ascend(std::vector<double>& logits, const std::vector<double>& probs, std::size_t k,
            double scale, double temperature) {
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double g = ((i == k ? 1.0 : 0.0) - probs[i]) / temperature;
    logits[i] += scale * g;
  }
}

}  // namespace

std::vector<CompletionTemplate> default_completion_templates() {
  return {
      {"stepwise",
       "<think>\nFirst, I estimate the location and orientation of each object.\n"
       "Next, I compute the distance, height difference and angle between them.\n"
       "Then, I compare the values.\nFinally, the comparison gives option {X}.\n</think>\n"
       "<answer>{X}</answer>"},
      {"brief", "<think>\nThe answer is {X}.\n</think>\n<answer>{X}</answer>"},
      {"verbose",
       "<think>\nLet me look at the scene carefully. Let me look at the scene carefully. "
       "Let me look at the scene carefully. Let me look at the scene carefully. "
       "Let me look at the scene carefully. Let me look at the scene carefully. "
       "Let me look at the scene carefully. Let me look at the scene carefully.\n"
       "The answer is {X}.\n</think>\n<answer>{X}</answer>"},
      {"untagged", "The answer is {X}."},
      {"double", "<answer>{X}</answer>\n<answer>{X}</answer>"},
      {"undecided", "I cannot decide."},
  };
}

std::string render_completion(const CompletionTemplate& t, char label) {
  std::string out = t.pattern;
  const std::string repl(1, label);
  for (std::size_t pos = out.find("{X}"); pos != std::string::npos; pos = out.find("{X}", pos + 1)) {
    out.replace(pos, 3, repl);
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& logits, double temperature) {
  std::vector<double> p(logits.size());
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - top) / temperature);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

ToyPolicy::ToyPolicy(std::size_t questions, std::vector<std::size_t> options_per_question,
                     std::size_t templates, double temperature)
    : temperature_(temperature) {
  if (options_per_question.size() != questions) throw Error("one option count per question");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidConfig("temperature must be positive");
  }
  for (std::size_t q = 0; q < questions; ++q) {
    answer_logits_.emplace_back(options_per_question[q], 0.0);
    template_logits_.emplace_back(templates, 0.0);
  }
}

std::vector<double> ToyPolicy::answer_probs(std::size_t q) const {
  return softmax(answer_logits_.at(q), temperature_);
}

std::vector<double> ToyPolicy::template_probs(std::size_t q) const {
  return softmax(template_logits_.at(q), temperature_);
}

void SimConfig::validate() const {
  if (bank.empty()) throw InvalidConfig("question bank is empty");
  if (group_size < 2) throw InvalidConfig("group size must be >= 2");
  if (steps == 0) throw InvalidConfig("steps must be >= 1");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw InvalidConfig("learning rate must be finite and >= 0");
  }
  if (!std::isfinite(kl_weight) || kl_weight < 0.0) throw InvalidConfig("kl weight must be >= 0");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidConfig("temperature must be positive");
  }
  if (templates.empty()) throw InvalidConfig("at least one completion template is required");
  for (const auto& r : bank) validate_record(r);
}

double policy_accuracy(const ToyPolicy& policy, const std::vector<QARecord>& bank,
                       const std::vector<CompletionTemplate>& templates) {
  double total = 0.0;
  for (std::size_t q = 0; q < bank.size(); ++q) {
    const auto pa = policy.answer_probs(q);
    const auto pt = policy.template_probs(q);
    for (std::size_t t = 0; t < templates.size(); ++t) {
      for (std::size_t a = 0; a < pa.size(); ++a) {
        const std::string text = render_completion(templates[t], bank[q].options[a].label);
        total += pt[t] * pa[a] * accuracy_reward(text, bank[q]);
      }
    }
  }
  return total / static_cast<double>(bank.size());
}

std::vector<QARecord> toy_bank(std::size_t n, std::uint64_t seed) {
  std::vector<QARecord> bank;
  Rng rng(mix_seed(seed, "toy-bank"));
  while (bank.size() < n) {
    const Vec3 a(rng.uniform(-4, 4), rng.uniform(0.5, 8), rng.uniform(0, 3));
    const Vec3 b(rng.uniform(-4, 4), rng.uniform(0.5, 8), rng.uniform(0, 3));
    QARecord r = make_distance_question("the first object", a, "the second object", b, rng);
    const char want = kOptionLabels[bank.size() % kOptionLabels.size()];
    const Option correct = *r.answer_option();
    std::vector<Option> others;
    for (const auto& o : r.options) {
      if (o.label != correct.label) others.push_back(o);
    }
    r.options.clear();
    for (std::size_t i = 0, k = 0; i < kOptionLabels.size(); ++i) {
      r.options.push_back(kOptionLabels[i] == want ? correct : others[k++]);
    }
    relabel(r.options);
    r.answer = want;
    r.record_id = fmt::format("toy:{:04d}", bank.size());
    r.scene_id = "toy";
    bank.push_back(std::move(r));
  }
  return bank;
}

SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  RewardConfig rcfg;
  rcfg.weights = preset_weights(cfg.preset);
  GrpoConfig gcfg{cfg.group_size, cfg.kl_weight, 1e-8};

  const std::size_t nq = cfg.bank.size();
  const std::size_t nt = cfg.templates.size();
  std::vector<std::size_t> n_options;
  // outcomes[q][t][a]
  std::vector<std::vector<std::vector<SampleOutcome>>> outcomes(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const QARecord& rec = cfg.bank[q];
    n_options.push_back(rec.options.size());
    outcomes[q].resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      for (const Option& o : rec.options) {
        const std::string text = render_completion(cfg.templates[t], o.label);
        const RewardBreakdown b = score_completion(text, rec, rcfg);
        outcomes[q][t].push_back({b.accuracy, b.composite, static_cast<double>(text.size())});
      }
    }
  }

  const auto expected_accuracy = [&](const ToyPolicy& p) {
    double total = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const auto pa = p.answer_probs(q);
      const auto pt = p.template_probs(q);
      for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t a = 0; a < pa.size(); ++a) total += pt[t] * pa[a] * outcomes[q][t][a].accuracy;
      }
    }
    return total / static_cast<double>(nq);
  };

  ToyPolicy policy(nq, n_options, nt, cfg.temperature);
  const ToyPolicy reference = policy;
  Rng rng(cfg.seed);

  SimReport report;
  report.initial_accuracy = expected_accuracy(policy);
  const std::size_t G = cfg.group_size;
  const double total_samples = static_cast<double>(nq * G);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    double acc_sum = 0.0, len_sum = 0.0, reward_sum = 0.0, kl_sum = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const auto pa = policy.answer_probs(q);
      const auto pt = policy.template_probs(q);
      const auto ref_pa = reference.answer_probs(q);
      const auto ref_pt = reference.template_probs(q);

      std::vector<std::size_t> ts(G), as(G);
      std::vector<double> rewards(G);
      for (std::size_t i = 0; i < G; ++i) {
        ts[i] = sample(pt, rng);
        as[i] = sample(pa, rng);
        const SampleOutcome& o = outcomes[q][ts[i]][as[i]];
        rewards[i] = o.reward;
        acc_sum += o.accuracy;
        len_sum += o.length;
        reward_sum += o.reward;
      }
      const AdvantageGroup group = grpo_advantages(rewards, gcfg);
      double adv_sum = 0.0;
      for (double a : group.advantages) adv_sum += a;
      report.max_abs_advantage_sum = std::max(report.max_abs_advantage_sum, std::abs(adv_sum));

      auto& al = policy.answer_logits(q);
      auto& tl = policy.template_logits(q);
      for (std::size_t i = 0; i < G; ++i) {
        const double cur = std::log(pt[ts[i]]) + std::log(pa[as[i]]);
        const double ref = std::log(ref_pt[ts[i]]) + std::log(ref_pa[as[i]]);
        kl_sum += kl_penalty(cur, ref, 1.0);
        // d/dcur of [A * cur - beta * k3(cur, ref)] = A - beta * (1 - exp(ref - cur)).
        const double coeff = group.advantages[i] - cfg.kl_weight * (1.0 - std::exp(ref - cur));
        const double scale = cfg.learning_rate * coeff / static_cast<double>(G);
        ascend(al, pa, as[i], scale, policy.temperature());
        ascend(tl, pt, ts[i], scale, policy.temperature());
      }
    }
    report.train_accuracy.push_back(acc_sum / total_samples);
    report.mean_length.push_back(len_sum / total_samples);
    report.mean_reward.push_back(reward_sum / total_samples);
    report.mean_kl.push_back(kl_sum / total_samples);
    report.policy_accuracy.push_back(expected_accuracy(policy));
  }
  report.final_accuracy = report.policy_accuracy.back();
  return report;
}

std::string report_to_tsv(const SimReport& r) {
  std::string out = "step\ttrain_accuracy\tpolicy_accuracy\tmean_length\tmean_reward\tmean_kl\n";
  for (std::size_t i = 0; i < r.train_accuracy.size(); ++i) {
    out += fmt::format("{}\t{:.6f}\t{:.6f}\t{:.3f}\t{:.6f}\t{:.6f}\n", i + 1, r.train_accuracy[i],
                       r.policy_accuracy[i], r.mean_length[i], r.mean_reward[i], r.mean_kl[i]);
  }
  return out;
}

}  // namespace forge
