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

#include "forge/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {
namespace {

using nlohmann::json;

constexpr double kFrameTolerance = 1e-6;
constexpr double kMinObjectZ = -0.5;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(std::string(what) + " must be an array of 3 numbers");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json object_to_json(const ObjectAnnotation& o) {
  return json{{"object_id", o.object_id},
              {"category", o.category},
              {"bbox2d", {o.bbox2d.x_min, o.bbox2d.y_min, o.bbox2d.x_max, o.bbox2d.y_max}},
              {"location", vec_json(o.location)},
              {"orientation", vec_json(o.orientation.vec())},
              {"verified", to_string(o.verified)}};
}

}  // namespace

std::string_view to_string(Verification v) {
  switch (v) {
    case Verification::unverified: return "unverified";
    case Verification::accepted: return "accepted";
    case Verification::rejected: return "rejected";
  }
  return "unverified";
}

std::string_view to_string(SceneSource s) {
  return s == SceneSource::human_verified ? "human_verified" : "unverified";
}

Verification parse_verification(std::string_view text) {
  if (text == "unverified") return Verification::unverified;
  if (text == "accepted") return Verification::accepted;
  if (text == "rejected") return Verification::rejected;
  throw Error("unknown verification state '" + std::string(text) + "'");
}

SceneSource parse_scene_source(std::string_view text) {
  if (text == "human_verified") return SceneSource::human_verified;
  if (text == "unverified") return SceneSource::unverified;
  throw Error("unknown scene source '" + std::string(text) + "'");
}

std::string ObjectAnnotation::display_name() const {
  return "the " + category + " (" + object_id + ")";
}

const ObjectAnnotation* SceneAnnotation::find(std::string_view object_id) const {
  for (const auto& o : objects) {
    if (o.object_id == object_id) return &o;
  }
  return nullptr;
}

void validate_scene(const SceneAnnotation& scene) {
  const auto fail = [&](const char* field, const std::string& what) {
    throw ValidationError(scene.scene_id, field, what);
  };
  if (scene.scene_id.empty()) fail("scene_id", "must be non-empty");
  if (scene.image_size.width <= 0 || scene.image_size.height <= 0) {
    fail("image_size", "width and height must be positive");
  }
  CalibratedFrame derived = [&] {
    try {
      return calibrated_frame(scene.extrinsics);
    } catch (const Error& e) {
      throw ValidationError(scene.scene_id, "extrinsics", e.what());
    }
  }();
  if ((derived.camera_position - scene.frame.camera_position).cwiseAbs().maxCoeff() >
          kFrameTolerance ||
      (derived.forward.vec() - scene.frame.forward.vec()).cwiseAbs().maxCoeff() >
          kFrameTolerance) {
    fail("frame", "inconsistent with extrinsics");
  }
  if (scene.frame.convention != kCalibratedConvention) {
    fail("frame", "unsupported convention '" + scene.frame.convention + "'");
  }

  std::set<std::string_view> ids;
  for (const auto& o : scene.objects) {
    if (o.object_id.empty()) fail("object_id", "must be non-empty");
    if (!ids.insert(o.object_id).second) fail("object_id", "duplicate id '" + o.object_id + "'");
    const BBox2D& b = o.bbox2d;
    if (!(b.x_min < b.x_max) || !(b.y_min < b.y_max)) {
      fail("bbox2d", "object '" + o.object_id + "' needs x_min < x_max and y_min < y_max");
    }
    if (!o.location.allFinite()) fail("location", "object '" + o.object_id + "' is not finite");
    if (o.location.z() < kMinObjectZ) {
      fail("location", "object '" + o.object_id + "' lies more than 0.5 m below ground");
    }
    if (std::abs(o.orientation.vec().norm() - 1.0) > 1e-9) {
      fail("orientation", "object '" + o.object_id + "' is not unit-norm");
    }
  }
}

nlohmann::json scene_to_json(const SceneAnnotation& scene) {
  const Mat3& r = scene.extrinsics.rotation();
  json rotation = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) rotation.push_back(r(i, k));
  }
  json objects = json::array();
  for (const auto& o : scene.objects) objects.push_back(object_to_json(o));
  return json{{"scene_id", scene.scene_id},
              {"image_path", scene.image_path},
              {"image_size", {scene.image_size.width, scene.image_size.height}},
              {"extrinsics",
               {{"rotation", std::move(rotation)},
                {"position", vec_json(scene.extrinsics.position())}}},
              {"frame",
               {{"camera_position", vec_json(scene.frame.camera_position)},
                {"forward", vec_json(scene.frame.forward.vec())},
                {"convention", scene.frame.convention}}},
              {"objects", std::move(objects)},
              {"source", to_string(scene.source)}};
}

SceneAnnotation scene_from_json(const nlohmann::json& record) {
  const std::string scene_id = record.value("scene_id", std::string{});
  std::string field = "scene_id";
  try {
    SceneAnnotation s;
    s.scene_id = record.at("scene_id").get<std::string>();
    field = "image_path";
    s.image_path = record.at("image_path").get<std::string>();
    field = "image_size";
    const json& size = record.at("image_size");
    if (!size.is_array() || size.size() != 2) throw Error("image_size must be [width, height]");
    s.image_size = {size.at(0).get<int>(), size.at(1).get<int>()};

    field = "extrinsics";
    const json& ex = record.at("extrinsics");
    const json& rot = ex.at("rotation");
    if (!rot.is_array() || rot.size() != 9) throw Error("rotation must have 9 numbers");
    Mat3 r;
    for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = rot.at(i).get<double>();
    s.extrinsics = CameraExtrinsics(r, vec_from(ex.at("position"), "position"));

    field = "frame";
    if (record.contains("frame")) {
      const json& f = record.at("frame");
      s.frame = CalibratedFrame{vec_from(f.at("camera_position"), "camera_position"),
                                UnitVec3::from_unit(vec_from(f.at("forward"), "forward")),
                                f.value("convention", std::string(kCalibratedConvention))};
    } else {
      s.frame = calibrated_frame(s.extrinsics);
    }

    field = "objects";
    for (const json& jo : record.at("objects")) {
      ObjectAnnotation o;
      field = "object_id";
      o.object_id = jo.at("object_id").get<std::string>();
      field = "category";
      o.category = jo.at("category").get<std::string>();
      field = "bbox2d";
      const json& b = jo.at("bbox2d");
      if (!b.is_array() || b.size() != 4) throw Error("bbox2d must have 4 numbers");
      o.bbox2d = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                  b.at(3).get<double>()};
      field = "location";
      o.location = vec_from(jo.at("location"), "location");
      field = "orientation";
      o.orientation = UnitVec3::from_unit(vec_from(jo.at("orientation"), "orientation"));
      field = "verified";
      o.verified = parse_verification(jo.value("verified", std::string("unverified")));
      s.objects.push_back(std::move(o));
    }
    field = "source";
    s.source = parse_scene_source(record.value("source", std::string("unverified")));
    validate_scene(s);
    return s;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(scene_id, field, e.what());
  }
}

SceneSet load_scenes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file '" + path.string() + "'");
  SceneSet scenes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!record.is_object()) throw ParseError(line_no, "record is not an object");
    scenes.push_back(scene_from_json(record));
  }
  return scenes;
}

std::size_t save_scenes(const SceneSet& scenes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write scene file '" + path.string() + "'");
  for (const auto& s : scenes) out << scene_to_json(s).dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
  return scenes.size();
}

SceneSet record_verdict(const SceneSet& scenes, std::string_view scene_id,
                        std::string_view object_id, Verification verdict) {
  SceneSet out = scenes;
  for (auto& s : out) {
    if (s.scene_id != scene_id) continue;
    for (auto& o : s.objects) {
      if (o.object_id == object_id) {
        o.verified = verdict;
        return out;
      }
    }
    throw NotFound("unknown object '" + std::string(object_id) + "' in scene '" +
                   std::string(scene_id) + "'");
  }
  throw NotFound("unknown scene '" + std::string(scene_id) + "'");
}

SceneSet mix_datasets(const SceneSet& verified, const SceneSet& unverified, double fraction,
                      std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InvalidConfig("unverified fraction must lie in [0, 1]");
  }
  const auto take = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(unverified.size())));
  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(unverified.size());
  order.resize(take);
  std::sort(order.begin(), order.end());

  SceneSet out = verified;
  out.reserve(verified.size() + take);
  for (std::size_t i : order) out.push_back(unverified[i]);
  return out;
}

SceneSet accepted_only(const SceneSet& scenes) {
  SceneSet out;
  for (const auto& s : scenes) {
    SceneAnnotation copy = s;
    std::erase_if(copy.objects,
                  [](const ObjectAnnotation& o) { return o.verified != Verification::accepted; });
    if (!copy.objects.empty()) out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace forge
