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

#include "forge/qa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {
namespace {

using nlohmann::json;

constexpr char kDefaultTemplates[] =
#include "forge_templates.inc"
    ;

constexpr std::array kCategoryNames = {
    std::pair{QACategory::height, "height"},
    std::pair{QACategory::location, "location"},
    std::pair{QACategory::orientation, "orientation"},
    std::pair{QACategory::multi_object, "multi_object"},
    std::pair{QACategory::perception_location, "perception_location"},
    std::pair{QACategory::perception_orientation, "perception_orientation"},
    std::pair{QACategory::computation_distance, "computation_distance"},
    std::pair{QACategory::computation_angle, "computation_angle"},
};

std::string fill(std::string text, std::initializer_list<std::pair<std::string_view, std::string>> vars) {
  for (const auto& [name, value] : vars) {
    const std::string token = "{" + std::string(name) + "}";
    for (std::size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + value.size())) {
      text.replace(pos, token.size(), value);
    }
  }
  return text;
}

const std::string& pick(const TemplateBank& bank, std::string_view key, Rng& rng) {
  const auto& options = bank.for_key(key);
  return options[rng.index(options.size())];
}

// Shuffles, relabels and returns the label of the option carrying `correct_key`.
char finalize_options(std::vector<Option>& options, std::string_view correct_key, Rng& rng) {
  rng.shuffle(options);
  relabel(options);
  for (const auto& o : options) {
    if (o.key == correct_key) return o.label;
  }
  throw Error("correct option missing");
}

Option opt(std::string text, std::string key) { return Option{'A', std::move(text), std::move(key)}; }

// Adds distractor texts (rendered) until `count` distinct ones exist besides `correct`.
std::vector<Option> with_distractors(const std::string& correct,
                                     const std::vector<std::string>& candidates,
                                     std::size_t count) {
  std::vector<Option> options{opt(correct, "correct")};
  std::set<std::string> seen{correct};
  for (const auto& c : candidates) {
    if (options.size() == count + 1) break;
    if (seen.insert(c).second) {
      options.push_back(opt(c, "distractor_" + std::to_string(options.size())));
    }
  }
  if (options.size() != count + 1) throw Error("could not build distinct distractors");
  return options;
}

Vec3 rounded(const Vec3& v) { return {round2(v.x()), round2(v.y()), round2(v.z())}; }

Vec3 rotate_z(const Vec3& v, double deg) {
  const double r = deg_to_rad(deg);
  return {std::cos(r) * v.x() - std::sin(r) * v.y(), std::sin(r) * v.x() + std::cos(r) * v.y(),
          v.z()};
}

QARecord perception_location_q(const SceneAnnotation& scene, const ObjectAnnotation& o, Rng& rng,
                               const QAConfig& cfg) {
  QARecord r;
  r.category = QACategory::perception_location;
  r.question_text = fill(pick(cfg.templates, "perception_location", rng), {{"a", o.display_name()}});
  std::vector<std::string> candidates;
  for (int i = 0; i < 32; ++i) {
    const Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    if (dir.norm() < 1e-6) continue;
    candidates.push_back(format_vec(o.location + dir.normalized() * rng.uniform(0.5, 2.0)));
  }
  r.options = with_distractors(format_vec(o.location), candidates, 3);
  r.answer = finalize_options(r.options, "correct", rng);
  r.provenance = {o.object_id};
  r.record_id = "basic3d:" + scene.scene_id + ":location:" + o.object_id;
  return r;
}

QARecord perception_orientation_q(const SceneAnnotation& scene, const ObjectAnnotation& o,
                                  Rng& rng, const QAConfig& cfg) {
  QARecord r;
  r.category = QACategory::perception_orientation;
  r.question_text =
      fill(pick(cfg.templates, "perception_orientation", rng), {{"a", o.display_name()}});
  const Vec3& v = o.orientation.vec();
  std::vector<std::string> candidates{format_vec(rotate_z(v, 90)), format_vec(rotate_z(v, 180)),
                                      format_vec(rotate_z(v, 270)), format_vec(-v)};
  for (int i = 0; i < 32; ++i) {
    const Vec3 d(rng.normal(), rng.normal(), rng.normal());
    if (d.norm() > 1e-6) candidates.push_back(format_vec(d.normalized()));
  }
  r.options = with_distractors(format_vec(v), candidates, 3);
  r.answer = finalize_options(r.options, "correct", rng);
  r.provenance = {o.object_id};
  r.record_id = "basic3d:" + scene.scene_id + ":orientation:" + o.object_id;
  return r;
}

// One entity of a reasoning trace: an object or the camera.
struct Entity {
  std::string name;  // "the chair"
  std::string id;
  Vec3 location;
  Vec3 orientation;

  std::string ref() const { return name + " {" + id + "}"; }
};

class TraceBuilder {
 public:
  // Returns the rounded value that the trace states.
  Vec3 locate(const Entity& e) {
    steps_.push_back(location_step(lead(), e.name, e.id, e.location));
    return *steps_.back().vector;
  }
  Vec3 orient(const Entity& e) {
    steps_.push_back(orientation_step(lead(), e.name, e.id, e.orientation));
    return *steps_.back().vector;
  }
  double compute(Metric metric, const Entity& a, const Vec3& loc_a, const Vec3& dir_a,
                 const Entity& b, const Vec3& loc_b, const Vec3& dir_b) {
    const double value = evaluate_metric(metric, loc_a, dir_a, loc_b, dir_b);
    steps_.push_back(computation_step("Then,", metric, a.name, a.id, b.name, b.id, value));
    return *steps_.back().scalar;
  }
  CoTTrace conclude(const std::string& statement, char label) {
    steps_.push_back(reasoning_step("Finally,", statement, {}, label));
    return CoTTrace{std::move(steps_), label};
  }

 private:
  std::string lead() { return steps_.empty() ? "First," : "Next,"; }
  std::vector<TraceStep> steps_;
};

std::string kind_template_key(const RelationFact& f) {
  if (f.kind == RelationKind::facing_toward) {
    return f.object_id == kCameraId ? "facing_toward_camera" : "facing_toward_object";
  }
  return std::string(to_string(f.kind));
}

}  // namespace

std::string_view to_string(QACategory c) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "height";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::basic3d: return "basic3d";
    case Variant::sr_qa: return "sr_qa";
    case Variant::sr_cot: return "sr_cot";
  }
  return "basic3d";
}

QACategory parse_category(std::string_view text) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (name == text) return cat;
  }
  throw Error("unknown question category '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  if (text == "basic3d") return Variant::basic3d;
  if (text == "sr_qa" || text == "srqa") return Variant::sr_qa;
  if (text == "sr_cot" || text == "srcot") return Variant::sr_cot;
  throw Error("unknown variant '" + std::string(text) + "'");
}

QACategory category_of(RelationKind kind) {
  switch (kind) {
    case RelationKind::taller:
    case RelationKind::higher:
    case RelationKind::above:
    case RelationKind::below:
      return QACategory::height;
    case RelationKind::closer_to_camera:
    case RelationKind::left_of:
    case RelationKind::right_of:
      return QACategory::location;
    case RelationKind::facing_toward:
    case RelationKind::facing_away:
    case RelationKind::facing_same_direction:
      return QACategory::orientation;
    case RelationKind::closer_to_anchor:
      return QACategory::multi_object;
  }
  return QACategory::height;
}

const Option* QARecord::answer_option() const {
  for (const auto& o : options) {
    if (o.label == answer) return &o;
  }
  return nullptr;
}

const Option* QARecord::option_with_key(std::string_view key) const {
  for (const auto& o : options) {
    if (o.key == key) return &o;
  }
  return nullptr;
}

void validate_record(const QARecord& r) {
  if (r.options.size() < 2 || r.options.size() > 4) {
    throw Error("record '" + r.record_id + "' needs 2 to 4 options");
  }
  std::set<std::string> texts;
  std::set<char> labels;
  for (const auto& o : r.options) {
    if (!texts.insert(o.text).second) throw Error("record '" + r.record_id + "' repeats an option");
    if (!is_option_label(o.label) || !labels.insert(o.label).second) {
      throw Error("record '" + r.record_id + "' has invalid option labels");
    }
  }
  if (r.answer_option() == nullptr) {
    throw Error("record '" + r.record_id + "' answer is not among its options");
  }
}

TemplateBank TemplateBank::defaults() { return from_json(json::parse(kDefaultTemplates)); }

TemplateBank TemplateBank::from_json(const nlohmann::json& j) {
  TemplateBank bank;
  for (const auto& [key, list] : j.items()) {
    auto templates = list.get<std::vector<std::string>>();
    if (templates.empty()) throw Error("template list '" + key + "' is empty");
    bank.templates_.emplace(key, std::move(templates));
  }
  return bank;
}

TemplateBank TemplateBank::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template file '" + path.string() + "'");
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(1, e.what());
  }
}

nlohmann::json TemplateBank::to_json() const {
  json j = json::object();
  for (const auto& [key, list] : templates_) j[key] = list;
  return j;
}

const std::vector<std::string>& TemplateBank::for_key(std::string_view key) const {
  auto it = templates_.find(key);
  if (it == templates_.end()) throw Error("no templates for '" + std::string(key) + "'");
  return it->second;
}

QARecord make_distance_question(std::string_view name_a, const Vec3& a, std::string_view name_b,
                                const Vec3& b, Rng& rng, const QAConfig& cfg) {
  QARecord r;
  r.variant = Variant::basic3d;
  r.category = QACategory::computation_distance;
  const Vec3 pa = rounded(a);
  const Vec3 pb = rounded(b);
  r.question_text = fill(pick(cfg.templates, "computation_distance", rng),
                         {{"a", std::string(name_a)},
                          {"b", std::string(name_b)},
                          {"pa", format_vec(pa)},
                          {"pb", format_vec(pb)}});
  const double d = distance(pa, pb);
  const auto txt = [](double v) { return format_fixed2(v) + " m"; };
  r.options = with_distractors(
      txt(d), {txt(d * 0.5), txt(d * 1.5), txt(d * 2.0), txt(d + 1.0), txt(d + 2.0), txt(d + 3.0)},
      3);
  r.answer = finalize_options(r.options, "correct", rng);
  return r;
}

QARecord make_angle_question(std::string_view name_a, const Vec3& a, std::string_view name_b,
                             const Vec3& b, Rng& rng, const QAConfig& cfg) {
  QARecord r;
  r.variant = Variant::basic3d;
  r.category = QACategory::computation_angle;
  const Vec3 pa = rounded(a);
  const Vec3 pb = rounded(b);
  r.question_text = fill(pick(cfg.templates, "computation_angle", rng),
                         {{"a", std::string(name_a)},
                          {"b", std::string(name_b)},
                          {"pa", format_vec(pa)},
                          {"pb", format_vec(pb)}});
  const double angle = angular_difference(UnitVec3::normalize(pa), UnitVec3::normalize(pb));
  const auto txt = [](double v) { return format_fixed2(v) + " degrees"; };
  r.options = with_distractors(
      txt(angle), {txt(180.0 - angle), txt(angle / 2.0), txt(angle <= 135.0 ? angle + 45.0 : angle - 45.0),
                   txt(90.0), txt(0.0), txt(180.0), txt(45.0), txt(135.0)},
      3);
  r.answer = finalize_options(r.options, "correct", rng);
  return r;
}

std::vector<QARecord> gen_basic3d(const SceneAnnotation& scene, std::uint64_t seed,
                                  const QAConfig& cfg) {
  std::vector<const ObjectAnnotation*> objs;
  for (const auto& o : scene.objects) objs.push_back(&o);
  std::sort(objs.begin(), objs.end(),
            [](const auto* x, const auto* y) { return x->object_id < y->object_id; });

  std::vector<QARecord> out;
  for (const auto* o : objs) {
    Rng rng(mix_seed(seed, "basic3d/" + scene.scene_id + "/" + o->object_id));
    out.push_back(perception_location_q(scene, *o, rng, cfg));
    out.push_back(perception_orientation_q(scene, *o, rng, cfg));
  }
  for (std::size_t i = 0; i < objs.size(); ++i) {
    for (std::size_t k = i + 1; k < objs.size(); ++k) {
      const auto& a = *objs[i];
      const auto& b = *objs[k];
      const std::string pair = a.object_id + "|" + b.object_id;
      Rng rng(mix_seed(seed, "basic3d/" + scene.scene_id + "/" + pair));
      QARecord d = make_distance_question(a.display_name(), a.location, b.display_name(),
                                          b.location, rng, cfg);
      d.record_id = "basic3d:" + scene.scene_id + ":distance:" + pair;
      d.provenance = {a.object_id, b.object_id};
      out.push_back(std::move(d));
      QARecord g = make_angle_question(a.display_name(), a.orientation.vec(), b.display_name(),
                                       b.orientation.vec(), rng, cfg);
      g.record_id = "basic3d:" + scene.scene_id + ":angle:" + pair;
      g.provenance = {a.object_id, b.object_id};
      out.push_back(std::move(g));
    }
  }
  for (auto& r : out) {
    r.scene_id = scene.scene_id;
    r.variant = Variant::basic3d;
  }
  return out;
}

std::string expected_answer_key(const RelationFact& f) {
  if (f.verdict == Verdict::ambiguous) throw Error("ambiguous fact has no answer");
  const bool holds = f.verdict == Verdict::holds;
  switch (f.kind) {
    case RelationKind::higher:
    case RelationKind::facing_same_direction:
      return holds ? "yes" : "no";
    case RelationKind::facing_toward:
      return holds ? "toward" : "away";
    default:
      return holds ? f.subject_id : f.object_id;
  }
}

std::vector<QARecord> gen_srqa(const SceneAnnotation& scene, std::span<const RelationFact> facts,
                               std::uint64_t seed, const QAConfig& cfg) {
  std::vector<QARecord> out;
  for (const RelationFact& f : facts) {
    if (f.scene_id != scene.scene_id || f.verdict == Verdict::ambiguous) continue;
    const auto* a = scene.find(f.subject_id);
    if (a == nullptr) throw NotFound("fact references unknown object '" + f.subject_id + "'");
    const auto* b = f.object_id == kCameraId ? nullptr : scene.find(f.object_id);
    if (b == nullptr && f.object_id != kCameraId) {
      throw NotFound("fact references unknown object '" + f.object_id + "'");
    }
    const auto* anchor = f.anchor_id.empty() ? nullptr : scene.find(f.anchor_id);
    if (!f.anchor_id.empty() && anchor == nullptr) {
      throw NotFound("fact references unknown anchor '" + f.anchor_id + "'");
    }

    const std::string fact_id = f.fact_id();
    Rng rng(mix_seed(seed, "srqa/" + fact_id));
    QARecord r;
    r.record_id = "srqa:" + fact_id;
    r.scene_id = scene.scene_id;
    r.variant = Variant::sr_qa;
    r.category = category_of(f.kind);
    r.provenance = {fact_id};
    r.question_text = fill(pick(cfg.templates, kind_template_key(f), rng),
                           {{"a", a->display_name()},
                            {"b", b != nullptr ? b->display_name() : std::string("the camera")},
                            {"anchor", anchor != nullptr ? anchor->display_name() : std::string()}});
    switch (f.kind) {
      case RelationKind::higher:
      case RelationKind::facing_same_direction:
        r.options = {opt("yes", "yes"), opt("no", "no")};
        break;
      case RelationKind::facing_toward:
        r.options = {opt("toward", "toward"), opt("away", "away")};
        break;
      case RelationKind::closer_to_anchor:
        r.options = {opt(a->display_name(), a->object_id), opt(b->display_name(), b->object_id),
                     opt("they are equally close", "equal"), opt("cannot be determined", "unknown")};
        break;
      default:
        r.options = {opt(a->display_name(), a->object_id), opt(b->display_name(), b->object_id)};
    }
    if (cfg.cannot_tell_option && r.options.size() == 2) {
      r.options.push_back(opt("cannot tell", "unknown"));
    }
    r.answer = finalize_options(r.options, expected_answer_key(f), rng);
    out.push_back(std::move(r));
  }
  return out;
}

CoTTrace gen_srcot(const QARecord& record, const SceneAnnotation& scene) {
  if (record.variant == Variant::basic3d) throw Error("Basic3D records have no relation trace");
  if (record.provenance.empty()) throw Error("record '" + record.record_id + "' has no provenance");
  const FactKey key = parse_fact_id(record.provenance.front());
  const Option* answer = record.answer_option();
  if (answer == nullptr) throw Error("record '" + record.record_id + "' has no valid answer");

  const auto entity = [&](const std::string& id) -> Entity {
    if (id == kCameraId) {
      return Entity{"the camera", id, scene.frame.camera_position, scene.frame.forward.vec()};
    }
    const auto* o = scene.find(id);
    if (o == nullptr) {
      throw NotFound("record '" + record.record_id + "' references missing object '" + id + "'");
    }
    return Entity{"the " + o->category, id, o->location, o->orientation.vec()};
  };
  const Entity a = entity(key.subject_id);
  const Entity b = entity(key.object_id);
  const Vec3 none = Vec3::Zero();

  TraceBuilder tb;
  std::string winner;
  std::string statement;
  const auto pick_pair = [&](bool a_wins, std::string_view relation) {
    const Entity& w = a_wins ? a : b;
    const Entity& l = a_wins ? b : a;
    winner = w.id;
    statement = fmt::format("{} {} {}", w.ref(), relation, l.ref());
  };

  switch (key.kind) {
    case RelationKind::taller: {
      const Vec3 la = tb.locate(a);
      const Vec3 lb = tb.locate(b);
      const double hd = tb.compute(Metric::height_difference, a, la, none, b, lb, none);
      pick_pair(hd > 0.0, "is taller than");
      break;
    }
    case RelationKind::higher: {
      const Vec3 la = tb.locate(a);
      const Vec3 lb = tb.locate(b);
      const double hd = tb.compute(Metric::height_difference, a, la, none, b, lb, none);
      winner = hd > 0.0 ? "yes" : "no";
      statement = fmt::format("{} is {} {}", a.ref(), hd > 0.0 ? "higher than" : "lower than", b.ref());
      break;
    }
    case RelationKind::closer_to_camera: {
      const Entity cam = entity(std::string(kCameraId));
      const Vec3 lc = tb.locate(cam);
      const Vec3 la = tb.locate(a);
      const Vec3 lb = tb.locate(b);
      const double da = tb.compute(Metric::distance, cam, lc, none, a, la, none);
      const double db = tb.compute(Metric::distance, cam, lc, none, b, lb, none);
      pick_pair(da < db, "is closer to the camera than");
      break;
    }
    case RelationKind::left_of: {
      const Entity cam = entity(std::string(kCameraId));
      const Vec3 lc = tb.locate(cam);
      const Vec3 oc = tb.orient(cam);
      const Vec3 la = tb.locate(a);
      const Vec3 lb = tb.locate(b);
      const double ba = tb.compute(Metric::bearing, a, la, none, cam, lc, oc);
      const double bb = tb.compute(Metric::bearing, b, lb, none, cam, lc, oc);
      pick_pair(ba < bb, "is further to the left than");
      break;
    }
    case RelationKind::above: {
      const Vec3 la = tb.locate(a);
      const Vec3 lb = tb.locate(b);
      tb.compute(Metric::horizontal_distance, a, la, none, b, lb, none);
      const double hd = tb.compute(Metric::height_difference, a, la, none, b, lb, none);
      pick_pair(hd > 0.0, "is above");
      break;
    }
    case RelationKind::facing_toward: {
      const Vec3 la = tb.locate(a);
      const Vec3 oa = tb.orient(a);
      const Vec3 lb = tb.locate(b);
      const double angle = tb.compute(Metric::facing_angle, a, la, oa, b, lb, none);
      winner = angle < 90.0 ? "toward" : "away";
      statement = fmt::format("{} is facing {} {}", a.ref(),
                              angle < 90.0 ? "toward" : "away from", b.ref());
      break;
    }
    case RelationKind::facing_same_direction: {
      const Vec3 oa = tb.orient(a);
      const Vec3 ob = tb.orient(b);
      const double angle = tb.compute(Metric::angle, a, none, oa, b, none, ob);
      winner = angle < 45.0 ? "yes" : "no";
      statement = fmt::format("{} and {} face {}", a.ref(), b.ref(),
                              angle < 45.0 ? "the same direction" : "different directions");
      break;
    }
    case RelationKind::closer_to_anchor: {
      const Entity anchor = entity(key.anchor_id);
      const Vec3 ln = tb.locate(anchor);
      const Vec3 la = tb.locate(a);
      const Vec3 lb = tb.locate(b);
      const double da = tb.compute(Metric::distance, anchor, ln, none, a, la, none);
      const double db = tb.compute(Metric::distance, anchor, ln, none, b, lb, none);
      pick_pair(da < db, fmt::format("is closer to {} than", anchor.ref()));
      break;
    }
    default:
      throw Error("relation kind '" + std::string(to_string(key.kind)) + "' has no trace");
  }
  if (winner != answer->key) {
    throw Error("record '" + record.record_id + "' answer contradicts the scene geometry");
  }
  return tb.conclude(statement, record.answer);
}

std::string render_record(const QARecord& record, const CoTTrace* trace) {
  std::string out = render_question(record.question_text, record.options);
  if (trace != nullptr) out += render_trace(*trace);
  return out;
}

nlohmann::json record_to_json(const QARecord& r) {
  json options = json::array();
  for (const auto& o : r.options) {
    options.push_back({{"label", std::string(1, o.label)}, {"text", o.text}, {"key", o.key}});
  }
  return json{{"record_id", r.record_id},
              {"scene_id", r.scene_id},
              {"category", to_string(r.category)},
              {"question_text", r.question_text},
              {"options", std::move(options)},
              {"answer", std::string(1, r.answer)},
              {"variant", to_string(r.variant)},
              {"provenance", r.provenance}};
}

QARecord record_from_json(const nlohmann::json& j) {
  QARecord r;
  r.record_id = j.at("record_id").get<std::string>();
  r.scene_id = j.value("scene_id", std::string{});
  r.category = parse_category(j.at("category").get<std::string>());
  r.question_text = j.at("question_text").get<std::string>();
  for (const auto& o : j.at("options")) {
    const auto label = o.at("label").get<std::string>();
    if (label.size() != 1) throw Error("option label must be one letter");
    r.options.push_back(Option{label[0], o.at("text").get<std::string>(),
                               o.value("key", std::string{})});
  }
  const auto answer = j.at("answer").get<std::string>();
  if (answer.size() != 1) throw Error("answer must be one letter");
  r.answer = answer[0];
  r.variant = parse_variant(j.at("variant").get<std::string>());
  r.provenance = j.value("provenance", std::vector<std::string>{});
  validate_record(r);
  return r;
}

void save_records(std::span<const RecordLine> lines, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write records file '" + path.string() + "'");
  for (const auto& line : lines) {
    json j = record_to_json(line.record);
    if (line.text) j["text"] = *line.text;
    out << j.dump() << '\n';
  }
  if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<RecordLine> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open records file '" + path.string() + "'");
  std::vector<RecordLine> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      RecordLine rl{record_from_json(j), std::nullopt};
      if (j.contains("text")) rl.text = j.at("text").get<std::string>();
      lines.push_back(std::move(rl));
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return lines;
}

}  // namespace forge
