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

// Rule-based ground-truth spatial relations with margin-qualified verdicts.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/scene.hpp"

namespace forge {

enum class RelationKind {
  taller,
  higher,
  closer_to_camera,
  left_of,
  right_of,
  above,
  below,
  facing_toward,
  facing_away,
  facing_same_direction,
  closer_to_anchor,
};

enum class Verdict { holds, holds_inverse, ambiguous };

/// What happens to margin-ambiguous results.
enum class BoundaryPolicy { discard, keep };

std::string_view to_string(RelationKind k);
std::string_view to_string(Verdict v);
std::string_view to_string(BoundaryPolicy p);
RelationKind parse_relation_kind(std::string_view text);
Verdict parse_verdict(std::string_view text);
BoundaryPolicy parse_boundary_policy(std::string_view text);

/// Id used for the camera when it takes part in a relation.
inline constexpr std::string_view kCameraId = "camera";

struct RelationConfig {
  double distance_margin_rel = 0.15;
  double height_margin_abs = 0.3;   // meters
  double angle_margin = 10.0;       // degrees
  double above_radius = 1.0;        // meters of horizontal separation allowed for above/below
  BoundaryPolicy boundary_policy = BoundaryPolicy::discard;

  /// Throws InvalidConfig unless every margin is positive.
  void validate() const;

  friend bool operator==(const RelationConfig&, const RelationConfig&) = default;
};

nlohmann::json to_json(const RelationConfig& cfg);
RelationConfig relation_config_from_json(const nlohmann::json& j);

struct RelationFact {
  std::string scene_id;
  RelationKind kind = RelationKind::taller;
  std::string subject_id;
  std::string object_id;
  std::string anchor_id;  // three-object kinds only
  Verdict verdict = Verdict::ambiguous;
  double margin_value = 0.0;  // measured gap, meters or degrees
  double threshold = 0.0;     // gap magnitude needed to leave the ambiguous band

  /// "<scene>|<kind>|<subject>|<object>|<anchor>"
  std::string fact_id() const;

  friend bool operator==(const RelationFact&, const RelationFact&) = default;
};

struct FactKey {
  std::string scene_id;
  RelationKind kind;
  std::string subject_id;
  std::string object_id;
  std::string anchor_id;
};
/// Inverse of RelationFact::fact_id. Throws Error on malformed ids.
FactKey parse_fact_id(std::string_view fact_id);

/// Non-ambiguous fact whose gap is within twice its threshold.
bool is_near_margin(const RelationFact& fact);

// Individual relations. Each compares subject `a` against the other argument.

/// taller: a.z - b.z against height_margin_abs.
RelationFact compare_height(const ObjectAnnotation& a, const ObjectAnnotation& b,
                            const RelationConfig& cfg);

/// higher: object height against the camera height.
RelationFact compare_height_to_camera(const ObjectAnnotation& a, const CalibratedFrame& frame,
                                      const RelationConfig& cfg);

/// closer_to_camera, relative margin on min(dist(a), dist(b)).
/// Throws DegenerateGeometry when either object sits at the camera position.
RelationFact compare_camera_distance(const ObjectAnnotation& a, const ObjectAnnotation& b,
                                     const CalibratedFrame& frame, const RelationConfig& cfg);

/// left_of from the viewer: holds when a's bearing is left of b's by more than angle_margin.
RelationFact viewer_left_right(const ObjectAnnotation& a, const ObjectAnnotation& b,
                               const CalibratedFrame& frame, const RelationConfig& cfg);

/// above: needs horizontal separation below above_radius, otherwise ambiguous.
RelationFact above_below(const ObjectAnnotation& a, const ObjectAnnotation& b,
                         const RelationConfig& cfg);

/// facing_toward with a 90 +/- angle_margin dead band (holds_inverse = facing away).
RelationFact facing_camera(const ObjectAnnotation& a, const CalibratedFrame& frame,
                           const RelationConfig& cfg);
RelationFact facing_object(const ObjectAnnotation& a, const ObjectAnnotation& target,
                           const RelationConfig& cfg);

/// Angle between the two orientations against a 45 +/- angle_margin band.
RelationFact facing_same_direction(const ObjectAnnotation& a, const ObjectAnnotation& b,
                                   const RelationConfig& cfg);

/// closer_to_anchor: holds when a is nearer the anchor than b (relative margin).
/// Throws Error for repeated ids.
RelationFact multi_object_closer_to(const ObjectAnnotation& anchor, const ObjectAnnotation& a,
                                    const ObjectAnnotation& b, const RelationConfig& cfg);

struct SkippedFact {
  RelationKind kind;
  std::string subject_id;
  std::string object_id;
  std::string anchor_id;
  std::string reason;

  friend bool operator==(const SkippedFact&, const SkippedFact&) = default;
};

struct DerivedFacts {
  std::vector<RelationFact> facts;
  std::vector<SkippedFact> skipped;

  friend bool operator==(const DerivedFacts&, const DerivedFacts&) = default;
};

/// Every applicable relation of the scene, ordered by (kind, subject, object,
/// anchor). Ambiguous facts are dropped or kept per cfg.boundary_policy.
DerivedFacts derive_all(const SceneAnnotation& scene, const RelationConfig& cfg);

// Facts file: a header line echoing the config, then one fact per line.
nlohmann::json fact_to_json(const RelationFact& fact);
RelationFact fact_from_json(const nlohmann::json& j);

struct FactsFile {
  RelationConfig config;
  std::vector<RelationFact> facts;
  std::vector<SkippedFact> skipped;
};

void save_facts(const FactsFile& file, const std::filesystem::path& path);
FactsFile load_facts(const std::filesystem::path& path);

}  // namespace forge
