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

#include <doctest.h>

#include "forge/error.hpp"
#include "forge/relations.hpp"
#include "forge/scene_filter.hpp"
#include "forge/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace forge;

namespace {

// Brute-force enumeration through the individual relation operations.
bool has_ambiguous_relation(const SceneAnnotation& s, const RelationConfig& cfg) {
  const auto& objs = s.objects;
  const auto amb = [](auto&& compute) {
    try {
      return compute().verdict == Verdict::ambiguous;
    } catch (const DegenerateGeometry&) {
      return false;
    }
  };
  for (const auto& a : objs) {
    if (amb([&] { return compare_height_to_camera(a, s.frame, cfg); }) || amb([&] { return facing_camera(a, s.frame, cfg); })) return true;
    for (const auto& b : objs) {
      if (&a == &b) continue;
      if (amb([&] { return facing_object(a, b, cfg); })) return true;
      if (a.object_id < b.object_id) {
        if (amb([&] { return compare_height(a, b, cfg); }) || amb([&] { return compare_camera_distance(a, b, s.frame, cfg); }) ||
            amb([&] { return viewer_left_right(a, b, s.frame, cfg); }) || amb([&] { return facing_same_direction(a, b, cfg); })) {
          return true;
        }
        if (horizontal_distance(a.location, b.location) < cfg.above_radius && amb([&] { return above_below(a, b, cfg); })) {
          return true;
        }
      }
      for (const auto& anchor : objs) {
        if (&anchor == &a || &anchor == &b || !(a.object_id < b.object_id)) continue;
        if (amb([&] { return multi_object_closer_to(anchor, a, b, cfg); })) return true;
      }
    }
  }
  return false;
}

}  // namespace

TEST_CASE("cluttered scenes are removed") {
  std::vector<ObjectAnnotation> six;
  for (int i = 0; i < 6; ++i) six.push_back(fixtures::object("o" + std::to_string(i), Vec3(i, 3, 0.5)));
  FilterConfig cfg;
  cfg.max_objects = 5;
  auto [out, report] = filter_scenes({fixtures::scene("busy", six)}, cfg);
  CHECK(out.empty());
  CHECK(report.removed_clutter == 1);
  CHECK(report.output_scenes == 0);
}

TEST_CASE("excluded categories are dropped per object") {
  auto s = fixtures::scene("s", {fixtures::object("w", Vec3(0, 3, 0.2), Vec3(0, -1, 0), "wire"),
                                 fixtures::object("c", Vec3(1, 3, 0.2))});
  FilterConfig cfg;
  cfg.excluded_categories = {"wire"};
  auto [out, report] = filter_scenes({s}, cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].objects.size() == 1);
  CHECK(out[0].objects[0].object_id == "c");
  CHECK(report.removed_objects_excluded == 1);
}

TEST_CASE("clutter is judged before exclusion") {
  std::vector<ObjectAnnotation> objs;
  for (int i = 0; i < 3; ++i) {
    objs.push_back(fixtures::object("w" + std::to_string(i), Vec3(i, 3, 0.2), Vec3(0, -1, 0), "wire"));
  }
  FilterConfig cfg;
  cfg.max_objects = 2;
  cfg.excluded_categories = {"wire"};
  auto [out, report] = filter_scenes({fixtures::scene("s", objs)}, cfg);
  CHECK(out.empty());
  CHECK(report.removed_clutter == 1);
}

TEST_CASE("boundary removals match a brute-force relation check") {
  const SceneSet scenes = random_scenes(150, 21);
  FilterConfig cfg;
  cfg.boundary_policy = BoundaryPolicy::discard;
  auto [out, report] = filter_scenes(scenes, cfg);

  std::size_t expected = 0;
  for (const auto& s : scenes) {
    if (s.objects.size() <= cfg.max_objects && has_ambiguous_relation(s, cfg.ambiguity_margins)) ++expected;
  }
  CHECK(report.removed_boundary == expected);
  CHECK(report.output_scenes == scenes.size() - report.removed_clutter - expected);
  CHECK(expected > 0);
  CHECK(report.output_scenes > 0);
}

TEST_CASE("filtering is idempotent and output is a subset") {
  SceneSet scenes = random_scenes(80, 5);
  scenes[0].objects[0].category = "wire";
  FilterConfig cfg;
  cfg.max_objects = 4;
  cfg.excluded_categories = {"wire"};
  cfg.boundary_policy = BoundaryPolicy::discard;
  auto [once, r1] = filter_scenes(scenes, cfg);
  auto [twice, r2] = filter_scenes(once, cfg);
  CHECK(once == twice);
  CHECK(r2.removed_clutter + r2.removed_boundary + r2.removed_objects_excluded == 0);
  for (const auto& s : once) {
    CHECK(s.objects.size() <= cfg.max_objects);
    for (const auto& o : s.objects) CHECK(o.category != "wire");
  }
}

TEST_CASE("filter config validation and JSON round-trip") {
  FilterConfig cfg;
  cfg.max_objects = 0;
  CHECK_THROWS(cfg.validate());
  cfg.max_objects = 7;
  cfg.excluded_categories = {"wire", "pole"};
  cfg.boundary_policy = BoundaryPolicy::discard;
  const auto back = filter_config_from_json(to_json(cfg));
  CHECK(back.max_objects == 7);
  CHECK(back.excluded_categories == cfg.excluded_categories);
  CHECK(back.boundary_policy == BoundaryPolicy::discard);
}
