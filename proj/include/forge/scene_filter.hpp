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

#include <cstddef>
#include <set>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "forge/relations.hpp"
#include "forge/scene.hpp"

namespace forge {

struct FilterConfig {
  std::size_t max_objects = 10;
  std::set<std::string> excluded_categories;
  RelationConfig ambiguity_margins;
  /// discard: drop every scene that has an ambiguous relation among its objects.
  BoundaryPolicy boundary_policy = BoundaryPolicy::keep;

  void validate() const;
};

nlohmann::json to_json(const FilterConfig& cfg);
FilterConfig filter_config_from_json(const nlohmann::json& j);

struct FilterReport {
  std::size_t input_scenes = 0;
  std::size_t removed_clutter = 0;        // scenes over max_objects
  std::size_t removed_objects_excluded = 0;  // objects of excluded categories
  std::size_t removed_boundary = 0;       // scenes with ambiguous relations
  std::size_t output_scenes = 0;

  friend bool operator==(const FilterReport&, const FilterReport&) = default;
};

nlohmann::json to_json(const FilterReport& report);

/// Clutter is judged on the raw object count, then excluded categories are
/// dropped, then (under boundary_policy = discard) scenes with any ambiguous
/// relation are removed. Idempotent.
std::pair<SceneSet, FilterReport> filter_scenes(const SceneSet& scenes, const FilterConfig& cfg);

}  // namespace forge
