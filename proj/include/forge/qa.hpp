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

// Training-data synthesis: Basic3D-QA, SR-QA and SR-CoT records.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/choice.hpp"
#include "forge/relations.hpp"
#include "forge/rng.hpp"
#include "forge/scene.hpp"
#include "forge/trace.hpp"

namespace forge {

enum class QACategory {
  height,
  location,
  orientation,
  multi_object,
  perception_location,
  perception_orientation,
  computation_distance,
  computation_angle,
};

enum class Variant { basic3d, sr_qa, sr_cot };

std::string_view to_string(QACategory c);
std::string_view to_string(Variant v);
QACategory parse_category(std::string_view text);
Variant parse_variant(std::string_view text);

/// Benchmark-style category a relation kind is asked under.
QACategory category_of(RelationKind kind);

struct QARecord {
  std::string record_id;
  std::string scene_id;
  QACategory category = QACategory::height;
  std::string question_text;
  std::vector<Option> options;
  char answer = 'A';
  Variant variant = Variant::basic3d;
  std::vector<std::string> provenance;  // fact ids (SR) or object ids (Basic3D)

  const Option* answer_option() const;
  const Option* option_with_key(std::string_view key) const;

  friend bool operator==(const QARecord&, const QARecord&) = default;
};

/// Throws Error when the answer is not among the options or option texts repeat.
void validate_record(const QARecord& record);

/// Question templates keyed by relation kind or Basic3D category. Placeholders:
/// {a}, {b}, {anchor}, {pa}, {pb} (rendered vectors).
class TemplateBank {
 public:
  static TemplateBank defaults();
  static TemplateBank from_json(const nlohmann::json& j);
  static TemplateBank load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Throws Error when `key` has no templates.
  const std::vector<std::string>& for_key(std::string_view key) const;

  friend bool operator==(const TemplateBank&, const TemplateBank&) = default;

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> templates_;
};

struct CorpusSizes {
  std::size_t sr_cot = 24000;
  std::size_t sr_qa = 1200;
  std::size_t basic3d = 12000;
};

struct QAConfig {
  bool cannot_tell_option = false;
  TemplateBank templates = TemplateBank::defaults();
  CorpusSizes sizes;
};

/// Perception (object location / orientation) and computation (distance /
/// angle from explicit vectors) questions. Empty for a scene without objects.
std::vector<QARecord> gen_basic3d(const SceneAnnotation& scene, std::uint64_t seed,
                                  const QAConfig& cfg = {});

/// Distance question between two explicit points; answer "<d> m".
QARecord make_distance_question(std::string_view name_a, const Vec3& a, std::string_view name_b,
                                const Vec3& b, Rng& rng, const QAConfig& cfg = {});
/// Angle question between two explicit directions; answer "<angle> degrees".
QARecord make_angle_question(std::string_view name_a, const Vec3& a, std::string_view name_b,
                             const Vec3& b, Rng& rng, const QAConfig& cfg = {});

/// One multiple-choice record per non-ambiguous fact of `scene`.
std::vector<QARecord> gen_srqa(const SceneAnnotation& scene, std::span<const RelationFact> facts,
                               std::uint64_t seed, const QAConfig& cfg = {});

/// Option key that a fact's verdict makes correct. Throws for ambiguous facts.
std::string expected_answer_key(const RelationFact& fact);

/// Step-structured reasoning for an SR record. Throws NotFound when the record
/// references objects missing from `scene`, Error when the record is not an
/// SR record or its answer contradicts the scene.
CoTTrace gen_srcot(const QARecord& record, const SceneAnnotation& scene);

/// Question and options, followed by the trace when one is given.
std::string render_record(const QARecord& record, const CoTTrace* trace = nullptr);

nlohmann::json record_to_json(const QARecord& record);
QARecord record_from_json(const nlohmann::json& j);

struct RecordLine {
  QARecord record;
  std::optional<std::string> text;  // rendered record (with trace for SR-CoT)
};

void save_records(std::span<const RecordLine> lines, const std::filesystem::path& path);
std::vector<RecordLine> load_records(const std::filesystem::path& path);

}  // namespace forge
