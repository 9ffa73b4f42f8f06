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

#include <filesystem>
#include <string>
#include <unistd.h>

#include "forge/scene.hpp"

namespace fixtures {

inline forge::ObjectAnnotation object(std::string id, const forge::Vec3& location,
                                      const forge::Vec3& orientation = forge::Vec3(0, -1, 0),
                                      std::string category = "chair") {
  forge::ObjectAnnotation o;
  o.object_id = std::move(id);
  o.category = std::move(category);
  o.bbox2d = forge::BBox2D{10, 10, 50, 60};
  o.location = location;
  o.orientation = forge::UnitVec3::normalize(orientation);
  return o;
}

/// Level camera at height 1.5 looking along +y.
inline forge::SceneAnnotation scene(std::string id, std::vector<forge::ObjectAnnotation> objects) {
  forge::SceneAnnotation s;
  s.scene_id = std::move(id);
  s.image_path = "images/" + s.scene_id + ".png";
  s.image_size = forge::ImageSize{640, 480};
  s.objects = std::move(objects);
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "forge-test-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
