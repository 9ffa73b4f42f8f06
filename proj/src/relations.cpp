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

#include "forge/relations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <tuple>

#include "forge/error.hpp"

namespace forge {
namespace {

using nlohmann::json;

constexpr double kCoincident = 1e-9;
constexpr double kFacingCenter = 90.0;
constexpr double kSameDirectionCenter = 45.0;

constexpr std::array kKindNames = {
    std::pair{RelationKind::taller, "taller"},
    std::pair{RelationKind::higher, "higher"},
    std::pair{RelationKind::closer_to_camera, "closer_to_camera"},
    std::pair{RelationKind::left_of, "left_of"},
    std::pair{RelationKind::right_of, "right_of"},
    std::pair{RelationKind::above, "above"},
    std::pair{RelationKind::below, "below"},
    std::pair{RelationKind::facing_toward, "facing_toward"},
    std::pair{RelationKind::facing_away, "facing_away"},
    std::pair{RelationKind::facing_same_direction, "facing_same_direction"},
    std::pair{RelationKind::closer_to_anchor, "closer_to_anchor"},
};

Verdict classify(double gap, double threshold) {
  if (gap > threshold) return Verdict::holds;
  if (gap < -threshold) return Verdict::holds_inverse;
  return Verdict::ambiguous;
}

RelationFact make_fact(RelationKind kind, std::string subject, std::string object, double gap,
                       double threshold) {
  RelationFact f;
  f.kind = kind;
  f.subject_id = std::move(subject);
  f.object_id = std::move(object);
  f.margin_value = gap;
  f.threshold = threshold;
  f.verdict = classify(gap, threshold);
  return f;
}

// Facing kinds store the measured angle; the gap is its offset from the band center.
double facing_gap(const RelationFact& f) {
  if (f.kind == RelationKind::facing_toward) return kFacingCenter - f.margin_value;
  if (f.kind == RelationKind::facing_same_direction) return kSameDirectionCenter - f.margin_value;
  return f.margin_value;
}

RelationFact facing_toward_point(const ObjectAnnotation& a, const Vec3& target,
                                 std::string target_id, const RelationConfig& cfg) {
  const Vec3 dir = target - a.location;
  if (dir.norm() < kCoincident) {
    throw DegenerateGeometry("facing target coincides with '" + a.object_id + "'");
  }
  const double angle = angular_difference(a.orientation, UnitVec3::normalize(dir));
  RelationFact f = make_fact(RelationKind::facing_toward, a.object_id, std::move(target_id),
                             kFacingCenter - angle, cfg.angle_margin);
  f.margin_value = angle;
  return f;
}

json skipped_to_json(const SkippedFact& s) {
  return json{{"kind", to_string(s.kind)},
              {"subject_id", s.subject_id},
              {"object_id", s.object_id},
              {"anchor_id", s.anchor_id},
              {"reason", s.reason}};
}

SkippedFact skipped_from_json(const json& j) {
  return SkippedFact{parse_relation_kind(j.at("kind").get<std::string>()),
                     j.at("subject_id").get<std::string>(), j.at("object_id").get<std::string>(),
                     j.value("anchor_id", std::string{}), j.value("reason", std::string{})};
}

}  // namespace

std::string_view to_string(RelationKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "taller";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_inverse: return "holds_inverse";
    case Verdict::ambiguous: return "ambiguous";
  }
  return "ambiguous";
}

std::string_view to_string(BoundaryPolicy p) {
  return p == BoundaryPolicy::discard ? "discard" : "keep";
}

RelationKind parse_relation_kind(std::string_view text) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == text) return kind;
  }
  throw Error("unknown relation kind '" + std::string(text) + "'");
}

Verdict parse_verdict(std::string_view text) {
  if (text == "holds") return Verdict::holds;
  if (text == "holds_inverse") return Verdict::holds_inverse;
  if (text == "ambiguous") return Verdict::ambiguous;
  throw Error("unknown verdict '" + std::string(text) + "'");
}

BoundaryPolicy parse_boundary_policy(std::string_view text) {
  if (text == "discard") return BoundaryPolicy::discard;
  if (text == "keep") return BoundaryPolicy::keep;
  throw Error("unknown boundary policy '" + std::string(text) + "'");
}

void RelationConfig::validate() const {
  if (!(distance_margin_rel > 0.0) || !(height_margin_abs > 0.0) || !(angle_margin > 0.0) ||
      !(above_radius > 0.0)) {
    throw InvalidConfig("relation margins must be positive");
  }
  if (angle_margin >= kSameDirectionCenter) {
    throw InvalidConfig("angle_margin must be below 45 degrees");
  }
}

nlohmann::json to_json(const RelationConfig& cfg) {
  return json{{"distance_margin_rel", cfg.distance_margin_rel},
              {"height_margin_abs", cfg.height_margin_abs},
              {"angle_margin", cfg.angle_margin},
              {"above_radius", cfg.above_radius},
              {"boundary_policy", to_string(cfg.boundary_policy)}};
}

RelationConfig relation_config_from_json(const nlohmann::json& j) {
  RelationConfig cfg;
  cfg.distance_margin_rel = j.value("distance_margin_rel", cfg.distance_margin_rel);
  cfg.height_margin_abs = j.value("height_margin_abs", cfg.height_margin_abs);
  cfg.angle_margin = j.value("angle_margin", cfg.angle_margin);
  cfg.above_radius = j.value("above_radius", cfg.above_radius);
  if (j.contains("boundary_policy")) {
    cfg.boundary_policy = parse_boundary_policy(j.at("boundary_policy").get<std::string>());
  }
  cfg.validate();
  return cfg;
}

std::string RelationFact::fact_id() const {
  return scene_id + "|" + std::string(to_string(kind)) + "|" + subject_id + "|" + object_id +
         "|" + anchor_id;
}

FactKey parse_fact_id(std::string_view fact_id) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t bar = fact_id.find('|', start);
    parts.emplace_back(fact_id.substr(start, bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (parts.size() != 5) throw Error("malformed fact id '" + std::string(fact_id) + "'");
  return FactKey{parts[0], parse_relation_kind(parts[1]), parts[2], parts[3], parts[4]};
}

bool is_near_margin(const RelationFact& fact) {
  if (fact.verdict == Verdict::ambiguous) return false;
  return std::abs(facing_gap(fact)) < 2.0 * fact.threshold;
}

RelationFact compare_height(const ObjectAnnotation& a, const ObjectAnnotation& b,
                            const RelationConfig& cfg) {
  return make_fact(RelationKind::taller, a.object_id, b.object_id,
                   height_of(a.location) - height_of(b.location), cfg.height_margin_abs);
}

RelationFact compare_height_to_camera(const ObjectAnnotation& a, const CalibratedFrame& frame,
                                      const RelationConfig& cfg) {
  return make_fact(RelationKind::higher, a.object_id, std::string(kCameraId),
                   height_of(a.location) - height_of(frame.camera_position),
                   cfg.height_margin_abs);
}

RelationFact compare_camera_distance(const ObjectAnnotation& a, const ObjectAnnotation& b,
                                     const CalibratedFrame& frame, const RelationConfig& cfg) {
  const double da = camera_distance(a.location, frame);
  const double db = camera_distance(b.location, frame);
  if (da < kCoincident || db < kCoincident) {
    throw DegenerateGeometry("object at the camera position");
  }
  return make_fact(RelationKind::closer_to_camera, a.object_id, b.object_id, db - da,
                   cfg.distance_margin_rel * std::min(da, db));
}

RelationFact viewer_left_right(const ObjectAnnotation& a, const ObjectAnnotation& b,
                               const CalibratedFrame& frame, const RelationConfig& cfg) {
  const double ba = horizontal_bearing(frame, a.location);
  const double bb = horizontal_bearing(frame, b.location);
  return make_fact(RelationKind::left_of, a.object_id, b.object_id, bb - ba, cfg.angle_margin);
}

RelationFact above_below(const ObjectAnnotation& a, const ObjectAnnotation& b,
                         const RelationConfig& cfg) {
  RelationFact f = make_fact(RelationKind::above, a.object_id, b.object_id,
                             height_of(a.location) - height_of(b.location), cfg.height_margin_abs);
  // Without horizontal overlap neither object is above the other.
  if (horizontal_distance(a.location, b.location) >= cfg.above_radius) {
    f.verdict = Verdict::ambiguous;
  }
  return f;
}

RelationFact facing_camera(const ObjectAnnotation& a, const CalibratedFrame& frame,
                           const RelationConfig& cfg) {
  return facing_toward_point(a, frame.camera_position, std::string(kCameraId), cfg);
}

RelationFact facing_object(const ObjectAnnotation& a, const ObjectAnnotation& target,
                           const RelationConfig& cfg) {
  return facing_toward_point(a, target.location, target.object_id, cfg);
}

RelationFact facing_same_direction(const ObjectAnnotation& a, const ObjectAnnotation& b,
                                   const RelationConfig& cfg) {
  const double angle = angular_difference(a.orientation, b.orientation);
  RelationFact f = make_fact(RelationKind::facing_same_direction, a.object_id, b.object_id,
                             kSameDirectionCenter - angle, cfg.angle_margin);
  f.margin_value = angle;
  return f;
}

RelationFact multi_object_closer_to(const ObjectAnnotation& anchor, const ObjectAnnotation& a,
                                    const ObjectAnnotation& b, const RelationConfig& cfg) {
  if (anchor.object_id == a.object_id || anchor.object_id == b.object_id ||
      a.object_id == b.object_id) {
    throw Error("closer-to-anchor needs three distinct objects");
  }
  const double da = distance(anchor.location, a.location);
  const double db = distance(anchor.location, b.location);
  if (da < kCoincident || db < kCoincident) {
    throw DegenerateGeometry("object coincides with the anchor '" + anchor.object_id + "'");
  }
  RelationFact f = make_fact(RelationKind::closer_to_anchor, a.object_id, b.object_id, db - da,
                             cfg.distance_margin_rel * std::min(da, db));
  f.anchor_id = anchor.object_id;
  return f;
}

DerivedFacts derive_all(const SceneAnnotation& scene, const RelationConfig& cfg) {
  cfg.validate();
  std::vector<const ObjectAnnotation*> objs;
  for (const auto& o : scene.objects) objs.push_back(&o);
  std::sort(objs.begin(), objs.end(),
            [](const auto* x, const auto* y) { return x->object_id < y->object_id; });

  DerivedFacts out;
  const auto attempt = [&](RelationKind kind, const std::string& s, const std::string& o,
                           const std::string& anchor, auto&& compute) {
    try {
      out.facts.push_back(compute());
    } catch (const DegenerateGeometry& e) {
      out.skipped.push_back(SkippedFact{kind, s, o, anchor, e.what()});
    }
  };
  const std::string camera(kCameraId);

  for (const auto* a : objs) {
    attempt(RelationKind::higher, a->object_id, camera, "",
            [&] { return compare_height_to_camera(*a, scene.frame, cfg); });
    attempt(RelationKind::facing_toward, a->object_id, camera, "",
            [&] { return facing_camera(*a, scene.frame, cfg); });
  }
  for (std::size_t i = 0; i < objs.size(); ++i) {
    for (std::size_t k = i + 1; k < objs.size(); ++k) {
      const auto& a = *objs[i];
      const auto& b = *objs[k];
      attempt(RelationKind::taller, a.object_id, b.object_id, "",
              [&] { return compare_height(a, b, cfg); });
      attempt(RelationKind::closer_to_camera, a.object_id, b.object_id, "",
              [&] { return compare_camera_distance(a, b, scene.frame, cfg); });
      attempt(RelationKind::left_of, a.object_id, b.object_id, "",
              [&] { return viewer_left_right(a, b, scene.frame, cfg); });
      if (horizontal_distance(a.location, b.location) < cfg.above_radius) {
        attempt(RelationKind::above, a.object_id, b.object_id, "",
                [&] { return above_below(a, b, cfg); });
      }
      attempt(RelationKind::facing_same_direction, a.object_id, b.object_id, "",
              [&] { return facing_same_direction(a, b, cfg); });
    }
  }
  for (const auto* a : objs) {
    for (const auto* b : objs) {
      if (a == b) continue;
      attempt(RelationKind::facing_toward, a->object_id, b->object_id, "",
              [&] { return facing_object(*a, *b, cfg); });
    }
  }
  for (const auto* anchor : objs) {
    for (std::size_t i = 0; i < objs.size(); ++i) {
      for (std::size_t k = i + 1; k < objs.size(); ++k) {
        if (objs[i] == anchor || objs[k] == anchor) continue;
        attempt(RelationKind::closer_to_anchor, objs[i]->object_id, objs[k]->object_id,
                anchor->object_id,
                [&] { return multi_object_closer_to(*anchor, *objs[i], *objs[k], cfg); });
      }
    }
  }

  for (auto& f : out.facts) f.scene_id = scene.scene_id;
  if (cfg.boundary_policy == BoundaryPolicy::discard) {
    std::erase_if(out.facts, [](const RelationFact& f) { return f.verdict == Verdict::ambiguous; });
  }
  const auto key = [](const auto& f) {
    return std::tie(f.kind, f.subject_id, f.object_id, f.anchor_id);
  };
  std::stable_sort(out.facts.begin(), out.facts.end(),
                   [&](const auto& x, const auto& y) { return key(x) < key(y); });
  std::stable_sort(out.skipped.begin(), out.skipped.end(),
                   [&](const auto& x, const auto& y) { return key(x) < key(y); });
  return out;
}

nlohmann::json fact_to_json(const RelationFact& f) {
  return json{{"type", "fact"},
              {"fact_id", f.fact_id()},
              {"scene_id", f.scene_id},
              {"relation_kind", to_string(f.kind)},
              {"subject_id", f.subject_id},
              {"object_id", f.object_id},
              {"anchor_id", f.anchor_id},
              {"verdict", to_string(f.verdict)},
              {"margin_value", f.margin_value},
              {"threshold", f.threshold}};
}

RelationFact fact_from_json(const nlohmann::json& j) {
  RelationFact f;
  f.scene_id = j.at("scene_id").get<std::string>();
  f.kind = parse_relation_kind(j.at("relation_kind").get<std::string>());
  f.subject_id = j.at("subject_id").get<std::string>();
  f.object_id = j.at("object_id").get<std::string>();
  f.anchor_id = j.value("anchor_id", std::string{});
  f.verdict = parse_verdict(j.at("verdict").get<std::string>());
  f.margin_value = j.at("margin_value").get<double>();
  f.threshold = j.at("threshold").get<double>();
  return f;
}

void save_facts(const FactsFile& file, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write facts file '" + path.string() + "'");
  json skipped = json::array();
  for (const auto& s : file.skipped) skipped.push_back(skipped_to_json(s));
  out << json{{"type", "header"}, {"config", to_json(file.config)}, {"skipped", skipped}}.dump()
      << '\n';
  for (const auto& f : file.facts) out << fact_to_json(f).dump() << '\n';
  if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
}

FactsFile load_facts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open facts file '" + path.string() + "'");
  FactsFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.value("type", std::string("fact")) == "header") {
        file.config = relation_config_from_json(j.at("config"));
        for (const auto& s : j.value("skipped", json::array())) {
          file.skipped.push_back(skipped_from_json(s));
        }
      } else {
        file.facts.push_back(fact_from_json(j));
      }
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return file;
}

}  // namespace forge
