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

// Benchmark evaluation with permutation-robust scoring, offline scoring of
// recorded predictions, report emission and the 2D bbox-center baseline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/choice.hpp"
#include "forge/scene.hpp"
#include "forge/trace.hpp"

namespace forge {

struct BenchQuestion {
  std::string question_id;
  std::string image_path;
  std::string question_text;
  std::vector<Option> options;
  char answer = 'A';
  std::string category;
  std::string scene_id;  // optional, enables failure attribution
  // Closer-to forms: anchor and one box / location per option.
  std::optional<BBox2D> anchor_box;
  std::vector<BBox2D> option_boxes;
  std::optional<Vec3> anchor_location;
  std::vector<Vec3> option_locations;

  friend bool operator==(const BenchQuestion&, const BenchQuestion&) = default;
};

/// Throws Error when the answer is not among the options.
void validate_question(const BenchQuestion& q);

nlohmann::json question_to_json(const BenchQuestion& q);
BenchQuestion question_from_json(const nlohmann::json& j);
std::vector<BenchQuestion> load_bench(const std::filesystem::path& path);
void save_bench(std::span<const BenchQuestion> questions, const std::filesystem::path& path);

/// Display order of option indices for permutation `index`. Index 0 keeps the
/// original order; later indices are seeded shuffles keyed by question id.
std::vector<std::size_t> option_order(const BenchQuestion& q, std::size_t index);

/// Options in display order, relabeled A, B, ...
std::vector<Option> displayed_options(const BenchQuestion& q, std::size_t index);

struct AdapterRequest {
  std::string question_id;
  std::size_t permutation = 0;
  std::string prompt;
  std::vector<Option> options;  // as displayed
};

/// Returns the completion text; any exception counts as an abstention.
using Adapter = std::function<std::string(const AdapterRequest&)>;

/// Runs `command` through the shell with the prompt on standard input and
/// returns its standard output. A non-zero exit status throws Error.
Adapter command_adapter(std::string command);

struct Prediction {
  std::string question_id;
  std::size_t permutation = 0;
  std::string completion;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path);

struct QuestionOutcome {
  std::string question_id;
  std::string category;
  bool correct = false;
  bool consistent = false;  // same original option chosen under every permutation
  std::vector<std::optional<char>> answers;  // original labels, per permutation
  std::vector<std::string> completions;       // per permutation

  friend bool operator==(const QuestionOutcome&, const QuestionOutcome&) = default;
};

struct CategoryScore {
  std::string category;
  std::size_t count = 0;
  std::size_t correct = 0;

  std::optional<double> accuracy() const;
  friend bool operator==(const CategoryScore&, const CategoryScore&) = default;
};

struct EvalReport {
  std::size_t permutations = 1;
  double mean = 0.0;
  std::vector<CategoryScore> categories;   // sorted by name
  std::vector<QuestionOutcome> outcomes;   // sorted by question id
  std::vector<FailureAttribution> attributions;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalOptions {
  std::size_t permutations = 2;
  /// 0 reads FORGE_PARALLELISM (default 1).
  std::size_t parallelism = 0;
  /// Scenes by id; when set, completions with a thinking block of questions
  /// carrying a scene_id are run through failure attribution.
  const std::map<std::string, SceneAnnotation>* scenes = nullptr;
  AttributionThresholds thresholds;
};

EvalReport run_eval(std::span<const BenchQuestion> questions, const Adapter& adapter,
                    const EvalOptions& opts = {});

/// Missing predictions count as abstentions. Throws Error on a duplicated
/// (question_id, permutation) pair.
EvalReport score_predictions(std::span<const BenchQuestion> questions,
                             std::span<const Prediction> predictions, const EvalOptions& opts = {});

std::vector<Prediction> predictions_from(const EvalReport& report);

/// Writes summary.tsv, categories.tsv, table1.tsv, outcomes.tsv and, when
/// attributions exist, attribution.tsv. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::filesystem::path& out_dir);

/// Candidate whose bbox center is nearest (pixel L2) to the anchor's center.
/// Ties go to the first-listed option. Throws NotApplicable without boxes.
char bbox_center_heuristic(const BenchQuestion& q);

/// Same rule on 3D locations. Throws NotApplicable without locations.
char nearest_3d_rule(const BenchQuestion& q);

struct BaselineReport {
  EvalReport report;           // over applicable questions only
  std::size_t not_applicable = 0;
};

/// Scores a rule (default: the bbox-center heuristic) as a one-permutation run.
BaselineReport run_baseline(std::span<const BenchQuestion> questions,
                            const std::function<char(const BenchQuestion&)>& rule = bbox_center_heuristic);

}  // namespace forge
