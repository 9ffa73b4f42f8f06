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

#include "forge/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

SceneAnnotation random_scene(Rng& rng, std::string scene_id, const SyntheticOptions& opts) {
  if (opts.min_objects > opts.max_objects || opts.categories.empty()) {
    throw InvalidConfig("invalid synthetic scene options");
  }
  SceneAnnotation scene;
  scene.scene_id = std::move(scene_id);
  scene.image_path = "images/" + scene.scene_id + ".png";
  scene.image_size = opts.image_size;
  scene.source = opts.source;
  const Vec3 position(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(1.0, 2.0));
  scene.extrinsics = CameraExtrinsics::from_angles(rng.uniform(-180.0, 180.0), rng.uniform(0.0, 25.0),
                                                   rng.uniform(-5.0, 5.0), position);
  scene.frame = calibrated_frame(scene.extrinsics);

  const double w = opts.image_size.width;
  const double h = opts.image_size.height;
  const std::size_t count = opts.min_objects + rng.index(opts.max_objects - opts.min_objects + 1);
  std::vector<std::size_t> per_category(opts.categories.size(), 0);
  for (int attempt = 0; scene.objects.size() < count && attempt < 1000; ++attempt) {
    const double u = rng.uniform(0.1 * w, 0.9 * w);
    const double v = rng.uniform(0.1 * h, 0.9 * h);
    const double depth = rng.uniform(1.5, 8.0);
    const Vec3 cam((u - 0.5 * w) / opts.focal_px * depth, (v - 0.5 * h) / opts.focal_px * depth, depth);
    const Vec3 loc = calibrate_point(cam, scene.extrinsics);
    if (loc.z() < 0.0 || loc.z() > 3.0) continue;
    const bool crowded = std::any_of(scene.objects.begin(), scene.objects.end(), [&](const auto& o) {
      return distance(o.location, loc) < opts.min_separation;
    });
    if (crowded) continue;

    const std::size_t c = rng.index(opts.categories.size());
    ObjectAnnotation obj;
    obj.category = opts.categories[c];
    obj.object_id = fmt::format("{}_{}", obj.category, ++per_category[c]);
    const double half = 0.5 * opts.focal_px * rng.uniform(0.3, 1.2) / depth;
    obj.bbox2d = BBox2D{std::max(0.0, u - half), std::max(0.0, v - half), std::min(w, u + half),
                        std::min(h, v + half)};
    obj.location = loc;
    const double yaw = rng.uniform(0.0, 6.283185307179586);
    obj.orientation =
        UnitVec3::normalize(Vec3(std::cos(yaw), std::sin(yaw), rng.uniform(-0.2, 0.2)));
    obj.verified = opts.verified;
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

SceneSet random_scenes(std::size_t n, std::uint64_t seed, const SyntheticOptions& opts) {
  SceneSet out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = fmt::format("scene_{:04}", i);
    Rng rng(mix_seed(seed, id));
    out.push_back(random_scene(rng, id, opts));
  }
  return out;
}

}  // namespace forge
