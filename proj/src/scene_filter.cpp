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

#include "forge/scene_filter.hpp"

#include <algorithm>

#include "forge/error.hpp"

namespace forge {

void FilterConfig::validate() const {
  if (max_objects < 1) throw InvalidConfig("max_objects must be at least 1");
  ambiguity_margins.validate();
}

nlohmann::json to_json(const FilterConfig& cfg) {
  return nlohmann::json{{"max_objects", cfg.max_objects},
                        {"excluded_categories", cfg.excluded_categories},
                        {"ambiguity_margins", to_json(cfg.ambiguity_margins)},
                        {"boundary_policy", to_string(cfg.boundary_policy)}};
}

FilterConfig filter_config_from_json(const nlohmann::json& j) {
  FilterConfig cfg;
  cfg.max_objects = j.value("max_objects", cfg.max_objects);
  if (j.contains("excluded_categories")) {
    cfg.excluded_categories = j.at("excluded_categories").get<std::set<std::string>>();
  }
  if (j.contains("ambiguity_margins")) {
    cfg.ambiguity_margins = relation_config_from_json(j.at("ambiguity_margins"));
  }
  if (j.contains("boundary_policy")) {
    cfg.boundary_policy = parse_boundary_policy(j.at("boundary_policy").get<std::string>());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const FilterReport& r) {
  return nlohmann::json{{"input_scenes", r.input_scenes},
                        {"removed_clutter", r.removed_clutter},
                        {"removed_objects_excluded", r.removed_objects_excluded},
                        {"removed_boundary", r.removed_boundary},
                        {"output_scenes", r.output_scenes}};
}

std::pair<SceneSet, FilterReport> filter_scenes(const SceneSet& scenes, const FilterConfig& cfg) {
  cfg.validate();
  RelationConfig margins = cfg.ambiguity_margins;
  margins.boundary_policy = BoundaryPolicy::keep;

  FilterReport report;
  report.input_scenes = scenes.size();
  SceneSet out;
  for (const auto& scene : scenes) {
    if (scene.objects.size() > cfg.max_objects) {
      ++report.removed_clutter;
      continue;
    }
    SceneAnnotation kept = scene;
    report.removed_objects_excluded += std::erase_if(kept.objects, [&](const ObjectAnnotation& o) {
      return cfg.excluded_categories.contains(o.category);
    });
    if (cfg.boundary_policy == BoundaryPolicy::discard) {
      const DerivedFacts derived = derive_all(kept, margins);
      const bool ambiguous = std::any_of(derived.facts.begin(), derived.facts.end(),
                                         [](const auto& f) { return f.verdict == Verdict::ambiguous; });
      if (ambiguous) {
        ++report.removed_boundary;
        continue;
      }
    }
    out.push_back(std::move(kept));
  }
  report.output_scenes = out.size();
  return {std::move(out), report};
}

}  // namespace forge
