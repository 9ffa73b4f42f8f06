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

// Seeded random scenes for demos, fixtures and property tests. Objects are
// placed in the camera's view through a nominal pinhole (focal 500 px).

#include <cstdint>
#include <string>
#include <vector>

#include "forge/rng.hpp"
#include "forge/scene.hpp"

namespace forge {

struct SyntheticOptions {
  std::size_t min_objects = 2;
  std::size_t max_objects = 6;
  double min_separation = 0.5;  // meters, between objects
  std::vector<std::string> categories{"chair", "table", "sofa", "lamp", "car", "dog", "bed", "cabinet"};
  Verification verified = Verification::unverified;
  SceneSource source = SceneSource::unverified;
  ImageSize image_size{640, 480};
  double focal_px = 500.0;
};

SceneAnnotation random_scene(Rng& rng, std::string scene_id, const SyntheticOptions& opts = {});

/// Scenes "scene_0000", "scene_0001", ... Each scene draws from its own
/// stream, so scene i does not depend on n.
SceneSet random_scenes(std::size_t n, std::uint64_t seed, const SyntheticOptions& opts = {});

}  // namespace forge
