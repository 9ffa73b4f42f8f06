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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/geometry.hpp"

namespace forge {

enum class Verification { unverified, accepted, rejected };
enum class SceneSource { human_verified, unverified };

std::string_view to_string(Verification v);
std::string_view to_string(SceneSource s);
Verification parse_verification(std::string_view text);
SceneSource parse_scene_source(std::string_view text);

struct BBox2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

struct ObjectAnnotation {
  std::string object_id;
  std::string category;
  BBox2D bbox2d;
  Vec3 location = Vec3::Zero();  // calibrated frame
  UnitVec3 orientation = UnitVec3::from_unit(Vec3::UnitY());
  Verification verified = Verification::unverified;

  /// "the <category> (<id>)", used in question text and options.
  std::string display_name() const;

  friend bool operator==(const ObjectAnnotation& a, const ObjectAnnotation& b) {
    return a.object_id == b.object_id && a.category == b.category && a.bbox2d == b.bbox2d &&
           a.location == b.location && a.orientation == b.orientation &&
           a.verified == b.verified;
  }
};

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct SceneAnnotation {
  std::string scene_id;
  std::string image_path;
  ImageSize image_size;
  CameraExtrinsics extrinsics = CameraExtrinsics::from_angles(0, 0, 0, Vec3(0, 0, 1.5));
  CalibratedFrame frame = calibrated_frame(extrinsics);
  std::vector<ObjectAnnotation> objects;
  SceneSource source = SceneSource::unverified;

  const ObjectAnnotation* find(std::string_view object_id) const;

  friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

using SceneSet = std::vector<SceneAnnotation>;

/// Throws ValidationError naming the scene and the offending field.
void validate_scene(const SceneAnnotation& scene);

nlohmann::json scene_to_json(const SceneAnnotation& scene);
/// Parses and validates one record.
SceneAnnotation scene_from_json(const nlohmann::json& record);

/// Reads a line-delimited scene file. Blank lines are skipped. Throws
/// ParseError (with the line number) or ValidationError.
SceneSet load_scenes(const std::filesystem::path& path);

/// Writes one record per line; returns the record count. Throws IoError.
std::size_t save_scenes(const SceneSet& scenes, const std::filesystem::path& path);

/// Returns a copy with one object's verification flag replaced.
/// Throws NotFound for unknown scene or object ids.
SceneSet record_verdict(const SceneSet& scenes, std::string_view scene_id,
                        std::string_view object_id, Verification verdict);

/// All of `verified` followed by a seeded uniform sample of
/// round(fraction * |unverified|) scenes from `unverified` (input order kept).
SceneSet mix_datasets(const SceneSet& verified, const SceneSet& unverified, double fraction,
                      std::uint64_t seed);

/// Scenes restricted to accepted objects; scenes left without objects are dropped.
SceneSet accepted_only(const SceneSet& scenes);

}  // namespace forge
