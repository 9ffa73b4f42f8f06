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

#include <fstream>
#include <set>

#include "forge/error.hpp"
#include "forge/scene.hpp"
#include "forge/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace forge;
using fixtures::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("empty file loads as an empty set") {
  TempDir dir;
  write(dir / "s.jsonl", "");
  CHECK(load_scenes(dir / "s.jsonl").empty());
}

TEST_CASE("save then load is the identity") {
  TempDir dir;
  SceneSet three = random_scenes(3, 4);
  CHECK(save_scenes(three, dir / "s.jsonl") == 3);
  CHECK(load_scenes(dir / "s.jsonl") == three);

  SceneSet many = random_scenes(1000, 99);
  save_scenes(many, dir / "many.jsonl");
  CHECK(load_scenes(dir / "many.jsonl") == many);
}

TEST_CASE("one record round-trips every field") {
  TempDir dir;
  auto s = fixtures::scene("one", {fixtures::object("a", Vec3(0.123456789, 2, 0.5))});
  s.extrinsics = CameraExtrinsics::from_angles(17, 8, -2, Vec3(0.1, 0.2, 1.3));
  s.frame = calibrated_frame(s.extrinsics);
  s.objects[0].verified = Verification::rejected;
  s.source = SceneSource::human_verified;
  save_scenes({s}, dir / "s.jsonl");
  const auto loaded = load_scenes(dir / "s.jsonl");
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0] == s);
}

TEST_CASE("invalid records name the scene and field") {
  auto s = fixtures::scene("bad", {fixtures::object("a", Vec3(0, 2, 0.5))});
  s.objects[0].bbox2d = BBox2D{50, 10, 50, 60};
  try {
    validate_scene(s);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.scene_id() == "bad");
    CHECK(e.field() == "bbox2d");
  }

  auto dup = fixtures::scene("dup", {fixtures::object("a", Vec3(0, 2, 0.5)),
                                     fixtures::object("a", Vec3(1, 2, 0.5))});
  CHECK_THROWS_AS(validate_scene(dup), ValidationError);

  auto deep = fixtures::scene("deep", {fixtures::object("a", Vec3(0, 2, -0.6))});
  CHECK_THROWS_AS(validate_scene(deep), ValidationError);

  auto frame = fixtures::scene("frame", {});
  frame.frame.camera_position = Vec3(0, 0, 2.0);
  CHECK_THROWS_AS(validate_scene(frame), ValidationError);
}

TEST_CASE("parse errors carry the line number") {
  TempDir dir;
  SceneSet one = random_scenes(1, 1);
  save_scenes(one, dir / "s.jsonl");
  std::ifstream in(dir / "s.jsonl");
  std::string line;
  std::getline(in, line);
  write(dir / "broken.jsonl", line + "\n\n{not json\n");
  try {
    load_scenes(dir / "broken.jsonl");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("saving to an unwritable location fails with IoError") {
  CHECK_THROWS_AS(save_scenes(random_scenes(1, 1), "/nonexistent-dir/x/s.jsonl"), IoError);
}

TEST_CASE("record_verdict changes exactly one flag") {
  const SceneSet set = random_scenes(3, 8);
  const auto& target = set[1].objects.front();
  const SceneSet out = record_verdict(set, set[1].scene_id, target.object_id, Verification::accepted);
  CHECK(out[1].objects.front().verified == Verification::accepted);
  SceneSet restored = out;
  restored[1].objects.front().verified = target.verified;
  CHECK(restored == set);

  CHECK_THROWS_AS(record_verdict(set, set[1].scene_id, "nope", Verification::accepted), NotFound);
  CHECK_THROWS_AS(record_verdict(set, "nope", target.object_id, Verification::accepted), NotFound);
}

TEST_CASE("rejected objects are dropped from the accepted subset") {
  SceneSet set = random_scenes(2, 8);
  for (auto& s : set) {
    for (auto& o : s.objects) o.verified = Verification::accepted;
  }
  const auto victim = set[0].objects.front().object_id;
  set = record_verdict(set, set[0].scene_id, victim, Verification::rejected);
  const SceneSet kept = accepted_only(set);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].find(victim) == nullptr);
  CHECK(kept[0].objects.size() + 1 == set[0].objects.size());
}

TEST_CASE("mix_datasets sizes and determinism") {
  SyntheticOptions verified_opts;
  verified_opts.source = SceneSource::human_verified;
  SceneSet verified = random_scenes(4, 1, verified_opts);
  for (auto& s : verified) s.scene_id = "v_" + s.scene_id;
  const SceneSet unverified = random_scenes(11, 2);

  CHECK(mix_datasets(verified, unverified, 0.0, 7) == verified);
  CHECK(mix_datasets(verified, unverified, 1.0, 7).size() == 15);
  CHECK(mix_datasets(verified, unverified, 0.5, 7) == mix_datasets(verified, unverified, 0.5, 7));
  for (double f : {0.1, 0.25, 0.5, 0.77, 0.9}) {
    const auto out = mix_datasets(verified, unverified, f, 3);
    CHECK(out.size() == verified.size() + static_cast<std::size_t>(std::llround(f * 11)));
    std::set<std::string> ids;
    for (const auto& s : out) ids.insert(s.scene_id);
    CHECK(ids.size() == out.size());
  }
  CHECK_THROWS(mix_datasets(verified, unverified, 1.5, 7));
}
