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

// Reasoning-trace grammar, parser, consistency checker and failure attribution.
//
// A completion is
//
//   <think>
//   First, the location of the chair {chair_1} is [1.00, 2.00, 0.50].
//   Then, the distance between the camera {camera} and the chair {chair_1} is 2.29 m.
//   Finally, the chair {chair_1} is closer, so the answer is A.
//   </think>
//   <answer>A</answer>
//
// with one step per line. Entities are referenced as `{id}`, 3D literals are
// bracketed 2-decimal triples and scalars carry a mandatory unit (m, degrees).

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/choice.hpp"
#include "forge/geometry.hpp"

namespace forge {

struct SceneAnnotation;

enum class StepKind { perception_location, perception_orientation, computation, reasoning };

enum class Metric {
  none,
  distance,             // |a - b|
  height_difference,    // a.z - b.z
  horizontal_distance,  // ground-plane |a - b|
  angle,                // between the orientations of a and b
  facing_angle,         // between a's orientation and the direction a -> b
  bearing,              // of a, relative to camera b (its location and orientation)
};

enum class Unit { none, meters, degrees };

std::string_view to_string(StepKind k);
std::string_view to_string(Metric m);
StepKind parse_step_kind(std::string_view text);

struct TraceStep {
  StepKind kind = StepKind::reasoning;
  Metric metric = Metric::none;
  std::vector<std::string> subjects;
  std::optional<Vec3> vector;   // perception steps
  std::optional<double> scalar; // computation steps
  Unit unit = Unit::none;
  std::optional<char> conclusion;  // reasoning steps
  std::string text;

  friend bool operator==(const TraceStep& a, const TraceStep& b) {
    return a.kind == b.kind && a.metric == b.metric && a.subjects == b.subjects &&
           a.vector == b.vector && a.scalar == b.scalar && a.unit == b.unit &&
           a.conclusion == b.conclusion && a.text == b.text;
  }
};

struct CoTTrace {
  std::vector<TraceStep> steps;
  char final_answer = 'A';

  friend bool operator==(const CoTTrace&, const CoTTrace&) = default;
};

// Step builders. `lead` is the sentence opener ("First,", "Next,", ...),
// `name` the human-readable entity name ("the chair").
TraceStep location_step(std::string_view lead, std::string_view name, std::string_view id,
                        const Vec3& value);
TraceStep orientation_step(std::string_view lead, std::string_view name, std::string_view id,
                           const Vec3& value);
TraceStep computation_step(std::string_view lead, Metric metric, std::string_view name_a,
                           std::string_view id_a, std::string_view name_b, std::string_view id_b,
                           double value);
TraceStep reasoning_step(std::string_view lead, std::string_view statement,
                         std::vector<std::string> subjects, char label);

/// Value of `metric` for the given inputs, as check_consistency recomputes it.
/// `loc_*` / `dir_*` are the locations and orientations of a and b.
double evaluate_metric(Metric metric, const Vec3& loc_a, const Vec3& dir_a, const Vec3& loc_b,
                       const Vec3& dir_b);

/// "<think>\n...\n</think>\n<answer>X</answer>"
std::string render_trace(const CoTTrace& trace);

struct ParsedTrace {
  std::string thinking_text;
  std::vector<TraceStep> steps;
  std::optional<char> answer;
  std::vector<std::string> warnings;
  bool has_think_block = false;
  bool has_answer_block = false;
};

/// Total: never throws; malformed structure is reported in `warnings`.
ParsedTrace parse_trace(std::string_view text);

/// Exactly one think block followed by exactly one answer block.
bool is_well_formed(std::string_view text);

/// Thinking-block content, or the whole text when there is no think block.
std::string thinking_content(std::string_view text);

/// Answer label by priority: answer block; last standalone letter followed by a
/// delimiter; exact option-text match; otherwise none.
std::optional<char> extract_answer(std::string_view text, std::span<const Option> options = {});

struct ClaimViolation {
  std::size_t step_index = 0;
  double claimed = 0.0;
  double recomputed = 0.0;
  double abs_error = 0.0;
};

struct ConsistencyReport {
  std::size_t checked_claims = 0;
  std::vector<ClaimViolation> violations;
  std::size_t unresolved_claims = 0;  // inputs never stated earlier in the trace
};

/// Recomputes every computation claim from the perception claims stated before
/// it and flags |claimed - recomputed| > tol.
ConsistencyReport check_consistency(const ParsedTrace& trace, double tol);

enum class Outcome { correct, perception_error, computation_error, reasoning_error, format_error };
std::string_view to_string(Outcome o);

struct AttributionThresholds {
  double orientation_deg = 30.0;
  double location_m = 1.0;
  double consistency_tol = 0.01;
};

struct FailureAttribution {
  Outcome outcome = Outcome::correct;
  std::optional<char> answer;
  std::vector<double> orientation_errors;  // degrees, per claimed object orientation
  std::vector<double> location_errors;     // meters, per claimed object location
  std::vector<double> distance_errors;     // meters, object-to-object metrics
  std::vector<double> depth_errors;        // meters, camera-distance claims
  std::vector<double> angle_errors;        // degrees, angle and bearing claims

  friend bool operator==(const FailureAttribution&, const FailureAttribution&) = default;
};

/// Precedence: format > perception > computation > reasoning > correct.
FailureAttribution attribute_failure(const ParsedTrace& trace, const SceneAnnotation& scene,
                                     char correct_answer, std::span<const Option> options,
                                     const AttributionThresholds& thresholds = {});

struct FailureMetrics {
  std::size_t questions = 0;
  std::size_t correct = 0;
  std::size_t perception_errors = 0;
  std::size_t computation_errors = 0;
  std::size_t reasoning_errors = 0;
  std::size_t format_errors = 0;
  std::optional<double> orientation_accuracy;  // fraction within the orientation threshold
  std::optional<double> location_mean_error;
  std::optional<double> angle_accuracy;
  std::optional<double> distance_mean_error;
  std::optional<double> depth_mean_error;

  double rate(Outcome o) const;
};

/// Throws Error for an empty list.
FailureMetrics failure_metrics(std::span<const FailureAttribution> items,
                               const AttributionThresholds& thresholds = {});

}  // namespace forge
