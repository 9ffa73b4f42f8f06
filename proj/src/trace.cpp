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

#include "forge/trace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/scene.hpp"

namespace forge {
namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

const std::string kNum = R"((-?\d+(?:\.\d+)?))";
const std::string kRef = R"([^{}\n]*?\{([^{}\s]+)\})";

const std::regex& vec_literal_re() {
  static const std::regex re(R"(\[\s*)" + kNum + R"(\s*,\s*)" + kNum + R"(\s*,\s*)" + kNum +
                             R"(\s*\])");
  return re;
}
const std::regex& location_re() {
  static const std::regex re("location of" + kRef + R"( is (\[[^\]\n]*\]))");
  return re;
}
const std::regex& orientation_re() {
  static const std::regex re("orientation of" + kRef + R"( is (\[[^\]\n]*\]))");
  return re;
}
const std::regex& linear_re() {
  static const std::regex re("(horizontal distance|height difference|distance) between" + kRef +
                             " and" + kRef + " is " + kNum + R"( m\b)");
  return re;
}
const std::regex& angle_re() {
  static const std::regex re("angle between the orientations of" + kRef + " and" + kRef +
                             " is " + kNum + " degrees");
  return re;
}
const std::regex& facing_re() {
  static const std::regex re("angle between the orientation of" + kRef +
                             " and the direction to" + kRef + " is " + kNum + " degrees");
  return re;
}
const std::regex& bearing_re() {
  static const std::regex re("bearing of" + kRef + " relative to" + kRef + " is " + kNum +
                             " degrees");
  return re;
}
const std::regex& conclusion_re() {
  static const std::regex re(R"(so the answer is ([A-D])\b)");
  return re;
}
const std::regex& entity_re() {
  static const std::regex re(R"(\{([^{}\s]+)\})");
  return re;
}
const std::regex& loose_claim_re() {
  static const std::regex re(R"(\[[^\]\n]*\]|-?\d+(?:\.\d+)? ?(?:m|degrees)\b)");
  return re;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t count_of(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::optional<Vec3> parse_vec(const std::string& literal) {
  std::smatch m;
  if (!std::regex_match(literal, m, vec_literal_re())) return std::nullopt;
  return Vec3(std::stod(m[1]), std::stod(m[2]), std::stod(m[3]));
}

std::vector<std::string> entities_in(const std::string& text) {
  std::vector<std::string> ids;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), entity_re());
       it != std::sregex_iterator(); ++it) {
    ids.push_back((*it)[1]);
  }
  return ids;
}

Metric linear_metric(const std::string& word) {
  if (word == "distance") return Metric::distance;
  if (word == "height difference") return Metric::height_difference;
  return Metric::horizontal_distance;
}

std::string_view metric_phrase(Metric m) {
  switch (m) {
    case Metric::distance: return "distance";
    case Metric::height_difference: return "height difference";
    case Metric::horizontal_distance: return "horizontal distance";
    default: return "";
  }
}

// Recognizes one line of the thinking block; nullopt for plain prose.
std::optional<TraceStep> parse_step_line(const std::string& line) {
  std::smatch m;
  TraceStep step;
  step.text = line;
  if (std::regex_search(line, m, location_re())) {
    auto v = parse_vec(m[2]);
    if (!v) return std::nullopt;
    step.kind = StepKind::perception_location;
    step.subjects = {m[1]};
    step.vector = *v;
    step.unit = Unit::meters;
    return step;
  }
  if (std::regex_search(line, m, orientation_re())) {
    auto v = parse_vec(m[2]);
    if (!v) return std::nullopt;
    step.kind = StepKind::perception_orientation;
    step.subjects = {m[1]};
    step.vector = *v;
    return step;
  }
  const auto computed = [&](Metric metric, Unit unit, const std::smatch& mm, int first) {
    step.kind = StepKind::computation;
    step.metric = metric;
    step.subjects = {mm[first], mm[first + 1]};
    step.scalar = std::stod(mm[first + 2]);
    step.unit = unit;
    return step;
  };
  if (std::regex_search(line, m, linear_re())) {
    return computed(linear_metric(m[1]), Unit::meters, m, 2);
  }
  if (std::regex_search(line, m, angle_re())) return computed(Metric::angle, Unit::degrees, m, 1);
  if (std::regex_search(line, m, facing_re())) {
    return computed(Metric::facing_angle, Unit::degrees, m, 1);
  }
  if (std::regex_search(line, m, bearing_re())) {
    return computed(Metric::bearing, Unit::degrees, m, 1);
  }
  if (std::regex_search(line, m, conclusion_re())) {
    step.kind = StepKind::reasoning;
    step.subjects = entities_in(line);
    step.conclusion = std::string(m[1])[0];
    return step;
  }
  return std::nullopt;
}

std::optional<char> label_from_fragment(const std::string& fragment) {
  static const std::regex re(R"(^\(?([A-D])\)?(?:[.:)]|\s|$))");
  std::smatch m;
  const std::string t = trim(fragment);
  if (std::regex_search(t, m, re)) return std::string(m[1])[0];
  return std::nullopt;
}

std::optional<char> match_option_text(const std::string& fragment,
                                      std::span<const Option> options) {
  std::string t = trim(fragment);
  while (!t.empty() && (t.back() == '.' || t.back() == '!')) t.pop_back();
  t = lower(trim(t));
  if (t.empty()) return std::nullopt;
  for (const auto& o : options) {
    if (lower(o.text) == t) return o.label;
  }
  return std::nullopt;
}

std::optional<std::string> answer_block(std::string_view text) {
  const std::size_t open = text.find(kAnswerOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const std::size_t start = open + kAnswerOpen.size();
  const std::size_t close = text.find(kAnswerClose, start);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(start, close - start));
}

struct EntityState {
  std::map<std::string, Vec3> locations;
  std::map<std::string, Vec3> orientations;
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::perception_location: return "perception_location";
    case StepKind::perception_orientation: return "perception_orientation";
    case StepKind::computation: return "computation";
    case StepKind::reasoning: return "reasoning";
  }
  return "reasoning";
}

StepKind parse_step_kind(std::string_view text) {
  for (StepKind k : {StepKind::perception_location, StepKind::perception_orientation,
                     StepKind::computation, StepKind::reasoning}) {
    if (to_string(k) == text) return k;
  }
  throw Error("unknown step kind '" + std::string(text) + "'");
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::none: return "none";
    case Metric::distance: return "distance";
    case Metric::height_difference: return "height_difference";
    case Metric::horizontal_distance: return "horizontal_distance";
    case Metric::angle: return "angle";
    case Metric::facing_angle: return "facing_angle";
    case Metric::bearing: return "bearing";
  }
  return "none";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::correct: return "correct";
    case Outcome::perception_error: return "perception_error";
    case Outcome::computation_error: return "computation_error";
    case Outcome::reasoning_error: return "reasoning_error";
    case Outcome::format_error: return "format_error";
  }
  return "correct";
}

TraceStep location_step(std::string_view lead, std::string_view name, std::string_view id,
                        const Vec3& value) {
  TraceStep s;
  s.kind = StepKind::perception_location;
  s.subjects = {std::string(id)};
  s.vector = Vec3(round2(value.x()), round2(value.y()), round2(value.z()));
  s.unit = Unit::meters;
  s.text = fmt::format("{} the location of {} {{{}}} is {}.", lead, name, id, format_vec(value));
  return s;
}

TraceStep orientation_step(std::string_view lead, std::string_view name, std::string_view id,
                           const Vec3& value) {
  TraceStep s;
  s.kind = StepKind::perception_orientation;
  s.subjects = {std::string(id)};
  s.vector = Vec3(round2(value.x()), round2(value.y()), round2(value.z()));
  s.text = fmt::format("{} the orientation of {} {{{}}} is {}.", lead, name, id, format_vec(value));
  return s;
}

TraceStep computation_step(std::string_view lead, Metric metric, std::string_view name_a,
                           std::string_view id_a, std::string_view name_b, std::string_view id_b,
                           double value) {
  TraceStep s;
  s.kind = StepKind::computation;
  s.metric = metric;
  s.subjects = {std::string(id_a), std::string(id_b)};
  s.scalar = round2(value);
  const std::string v = format_fixed2(value);
  switch (metric) {
    case Metric::distance:
    case Metric::height_difference:
    case Metric::horizontal_distance:
      s.unit = Unit::meters;
      s.text = fmt::format("{} the {} between {} {{{}}} and {} {{{}}} is {} m.", lead,
                           metric_phrase(metric), name_a, id_a, name_b, id_b, v);
      break;
    case Metric::angle:
      s.unit = Unit::degrees;
      s.text = fmt::format(
          "{} the angle between the orientations of {} {{{}}} and {} {{{}}} is {} degrees.", lead,
          name_a, id_a, name_b, id_b, v);
      break;
    case Metric::facing_angle:
      s.unit = Unit::degrees;
      s.text = fmt::format(
          "{} the angle between the orientation of {} {{{}}} and the direction to {} {{{}}} is {} "
          "degrees.",
          lead, name_a, id_a, name_b, id_b, v);
      break;
    case Metric::bearing:
      s.unit = Unit::degrees;
      s.text = fmt::format("{} the bearing of {} {{{}}} relative to {} {{{}}} is {} degrees.", lead,
                           name_a, id_a, name_b, id_b, v);
      break;
    case Metric::none:
      throw Error("computation step needs a metric");
  }
  return s;
}

TraceStep reasoning_step(std::string_view lead, std::string_view statement,
                         std::vector<std::string> subjects, char label) {
  TraceStep s;
  s.kind = StepKind::reasoning;
  s.text = fmt::format("{} {}, so the answer is {}.", lead, statement, label);
  s.subjects = entities_in(s.text);
  if (!subjects.empty() && subjects != s.subjects) {
    throw Error("reasoning statement does not reference the given subjects");
  }
  s.conclusion = label;
  return s;
}

double evaluate_metric(Metric metric, const Vec3& loc_a, const Vec3& dir_a, const Vec3& loc_b,
                       const Vec3& dir_b) {
  switch (metric) {
    case Metric::distance: return distance(loc_a, loc_b);
    case Metric::height_difference: return height_of(loc_a) - height_of(loc_b);
    case Metric::horizontal_distance: return horizontal_distance(loc_a, loc_b);
    case Metric::angle:
      return angular_difference(UnitVec3::normalize(dir_a), UnitVec3::normalize(dir_b));
    case Metric::facing_angle:
      return angular_difference(UnitVec3::normalize(dir_a), UnitVec3::normalize(loc_b - loc_a));
    case Metric::bearing: {
      const UnitVec3 fwd = UnitVec3::normalize(Vec3(dir_b.x(), dir_b.y(), 0.0));
      return horizontal_bearing(CalibratedFrame{loc_b, fwd}, loc_a);
    }
    case Metric::none: break;
  }
  throw Error("metric 'none' cannot be evaluated");
}

std::string render_trace(const CoTTrace& trace) {
  std::string out(kThinkOpen);
  out += '\n';
  for (const auto& s : trace.steps) {
    out += s.text;
    out += '\n';
  }
  out += fmt::format("{}\n{}{}{}", kThinkClose, kAnswerOpen, trace.final_answer, kAnswerClose);
  return out;
}

bool is_well_formed(std::string_view text) {
  if (count_of(text, kThinkOpen) != 1 || count_of(text, kThinkClose) != 1 ||
      count_of(text, kAnswerOpen) != 1 || count_of(text, kAnswerClose) != 1) {
    return false;
  }
  const std::size_t a = text.find(kThinkOpen);
  const std::size_t b = text.find(kThinkClose);
  const std::size_t c = text.find(kAnswerOpen);
  const std::size_t d = text.find(kAnswerClose);
  return a < b && b < c && c < d;
}

std::string thinking_content(std::string_view text) {
  const std::size_t open = text.find(kThinkOpen);
  if (open == std::string_view::npos) {
    std::string whole(text);
    const std::size_t a = whole.find(kAnswerOpen);
    if (a != std::string::npos) {
      const std::size_t b = whole.find(kAnswerClose, a);
      whole.erase(a, b == std::string::npos ? std::string::npos : b + kAnswerClose.size() - a);
    }
    return whole;
  }
  const std::size_t start = open + kThinkOpen.size();
  std::size_t end = text.find(kThinkClose, start);
  if (end == std::string_view::npos) end = text.find(kAnswerOpen, start);
  return std::string(text.substr(start, end == std::string_view::npos ? end : end - start));
}

ParsedTrace parse_trace(std::string_view text) {
  ParsedTrace out;
  const std::size_t open = text.find(kThinkOpen);
  const std::size_t close =
      open == std::string_view::npos ? std::string_view::npos : text.find(kThinkClose, open);
  out.has_think_block = open != std::string_view::npos && close != std::string_view::npos;
  if (open != std::string_view::npos && close == std::string_view::npos) {
    out.warnings.push_back("unterminated think block");
  }
  if (count_of(text, kThinkOpen) > 1) out.warnings.push_back("multiple think blocks");
  out.has_answer_block = answer_block(text).has_value();
  if (text.find(kAnswerOpen) != std::string_view::npos && !out.has_answer_block) {
    out.warnings.push_back("unterminated answer block");
  }
  if (count_of(text, kAnswerOpen) > 1) out.warnings.push_back("multiple answer blocks");

  out.thinking_text = thinking_content(text);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const std::string& body = out.thinking_text;
  while (pos <= body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string::npos) nl = body.size();
    std::string line = body.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    pos = nl + 1;
    if (trim(line).empty()) continue;
    if (auto step = parse_step_line(line)) {
      out.steps.push_back(std::move(*step));
    } else if (std::regex_search(line, loose_claim_re())) {
      out.warnings.push_back(fmt::format("line {}: unrecognized numeric claim", line_no));
    }
  }
  out.answer = extract_answer(text);
  return out;
}

std::optional<char> extract_answer(std::string_view text, std::span<const Option> options) {
  if (auto block = answer_block(text)) {
    if (auto label = label_from_fragment(*block)) return label;
    if (auto label = match_option_text(*block, options)) return label;
  }
  static const std::regex standalone(R"((?:^|[^A-Za-z0-9_])\(?([A-D])\)?(?=[.,;:!?)\n\r]|$))");
  const std::string s(text);
  std::optional<char> last;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), standalone);
       it != std::sregex_iterator(); ++it) {
    last = std::string((*it)[1])[0];
  }
  if (last) return last;
  return match_option_text(s, options);
}

ConsistencyReport check_consistency(const ParsedTrace& trace, double tol) {
  ConsistencyReport report;
  EntityState state;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    if (s.kind == StepKind::perception_location && s.vector && !s.subjects.empty()) {
      state.locations[s.subjects[0]] = *s.vector;
      continue;
    }
    if (s.kind == StepKind::perception_orientation && s.vector && !s.subjects.empty()) {
      state.orientations[s.subjects[0]] = *s.vector;
      continue;
    }
    if (s.kind != StepKind::computation || !s.scalar || s.subjects.size() != 2) continue;
    ++report.checked_claims;

    const auto& a = s.subjects[0];
    const auto& b = s.subjects[1];
    const bool needs_loc_a = s.metric != Metric::angle;
    const bool needs_loc_b = s.metric != Metric::angle;
    const bool needs_dir_a = s.metric == Metric::angle || s.metric == Metric::facing_angle;
    const bool needs_dir_b = s.metric == Metric::angle || s.metric == Metric::bearing;
    const auto get = [](const std::map<std::string, Vec3>& m, const std::string& id,
                        bool needed) -> std::optional<Vec3> {
      if (!needed) return Vec3::Zero();
      auto it = m.find(id);
      if (it == m.end()) return std::nullopt;
      return it->second;
    };
    const auto la = get(state.locations, a, needs_loc_a);
    const auto lb = get(state.locations, b, needs_loc_b);
    const auto da = get(state.orientations, a, needs_dir_a);
    const auto db = get(state.orientations, b, needs_dir_b);
    if (!la || !lb || !da || !db) {
      ++report.unresolved_claims;
      continue;
    }
    double recomputed;
    try {
      recomputed = evaluate_metric(s.metric, *la, *da, *lb, *db);
    } catch (const Error&) {
      ++report.unresolved_claims;
      continue;
    }
    const double err = std::abs(*s.scalar - recomputed);
    if (err > tol) report.violations.push_back({i, *s.scalar, recomputed, err});
  }
  return report;
}

FailureAttribution attribute_failure(const ParsedTrace& trace, const SceneAnnotation& scene,
                                     char correct_answer, std::span<const Option> options,
                                     const AttributionThresholds& thresholds) {
  FailureAttribution out;
  out.answer = trace.answer;
  if (!out.answer && !options.empty()) out.answer = extract_answer(trace.thinking_text, options);

  const auto gt_location = [&](const std::string& id) -> std::optional<Vec3> {
    if (id == "camera") return scene.frame.camera_position;
    if (const auto* o = scene.find(id)) return o->location;
    return std::nullopt;
  };
  const auto gt_orientation = [&](const std::string& id) -> std::optional<Vec3> {
    if (id == "camera") return scene.frame.forward.vec();
    if (const auto* o = scene.find(id)) return o->orientation.vec();
    return std::nullopt;
  };

  for (const TraceStep& s : trace.steps) {
    if (s.subjects.empty()) continue;
    const std::string& a = s.subjects[0];
    if (s.kind == StepKind::perception_location && s.vector && a != "camera") {
      if (auto gt = gt_location(a)) out.location_errors.push_back(distance(*s.vector, *gt));
    } else if (s.kind == StepKind::perception_orientation && s.vector && a != "camera") {
      auto gt = gt_orientation(a);
      if (!gt) continue;
      try {
        out.orientation_errors.push_back(
            angular_difference(UnitVec3::normalize(*s.vector), UnitVec3::normalize(*gt)));
      } catch (const Error&) {
        out.orientation_errors.push_back(180.0);  // zero vector claimed
      }
    } else if (s.kind == StepKind::computation && s.scalar && s.subjects.size() == 2) {
      const std::string& b = s.subjects[1];
      const auto la = gt_location(a);
      const auto lb = gt_location(b);
      const auto da = gt_orientation(a);
      const auto db = gt_orientation(b);
      if (!la || !lb || !da || !db) continue;
      double truth;
      try {
        truth = evaluate_metric(s.metric, *la, *da, *lb, *db);
      } catch (const Error&) {
        continue;
      }
      const double err = std::abs(*s.scalar - truth);
      switch (s.metric) {
        case Metric::distance:
          (a == "camera" || b == "camera" ? out.depth_errors : out.distance_errors).push_back(err);
          break;
        case Metric::height_difference:
        case Metric::horizontal_distance:
          out.distance_errors.push_back(err);
          break;
        default:
          out.angle_errors.push_back(err);
      }
    }
  }

  const bool perception_bad =
      std::any_of(out.orientation_errors.begin(), out.orientation_errors.end(),
                  [&](double e) { return e > thresholds.orientation_deg; }) ||
      std::any_of(out.location_errors.begin(), out.location_errors.end(),
                  [&](double e) { return e > thresholds.location_m; });
  if (!trace.has_think_block || !trace.has_answer_block || !out.answer) {
    out.outcome = Outcome::format_error;
  } else if (perception_bad) {
    out.outcome = Outcome::perception_error;
  } else if (!check_consistency(trace, thresholds.consistency_tol).violations.empty()) {
    out.outcome = Outcome::computation_error;
  } else if (*out.answer != correct_answer) {
    out.outcome = Outcome::reasoning_error;
  } else {
    out.outcome = Outcome::correct;
  }
  return out;
}

double FailureMetrics::rate(Outcome o) const {
  const auto n = static_cast<double>(questions);
  switch (o) {
    case Outcome::correct: return static_cast<double>(correct) / n;
    case Outcome::perception_error: return static_cast<double>(perception_errors) / n;
    case Outcome::computation_error: return static_cast<double>(computation_errors) / n;
    case Outcome::reasoning_error: return static_cast<double>(reasoning_errors) / n;
    case Outcome::format_error: return static_cast<double>(format_errors) / n;
  }
  return 0.0;
}

FailureMetrics failure_metrics(std::span<const FailureAttribution> items,
                               const AttributionThresholds& thresholds) {
  if (items.empty()) throw Error("failure metrics need at least one attribution");
  FailureMetrics m;
  m.questions = items.size();
  std::vector<double> orient, loc, angle, dist, depth;
  for (const auto& a : items) {
    switch (a.outcome) {
      case Outcome::correct: ++m.correct; break;
      case Outcome::perception_error: ++m.perception_errors; break;
      case Outcome::computation_error: ++m.computation_errors; break;
      case Outcome::reasoning_error: ++m.reasoning_errors; break;
      case Outcome::format_error: ++m.format_errors; break;
    }
    orient.insert(orient.end(), a.orientation_errors.begin(), a.orientation_errors.end());
    loc.insert(loc.end(), a.location_errors.begin(), a.location_errors.end());
    angle.insert(angle.end(), a.angle_errors.begin(), a.angle_errors.end());
    dist.insert(dist.end(), a.distance_errors.begin(), a.distance_errors.end());
    depth.insert(depth.end(), a.depth_errors.begin(), a.depth_errors.end());
  }
  const auto within = [&](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    const auto hits = std::count_if(v.begin(), v.end(),
                                    [&](double e) { return e <= thresholds.orientation_deg; });
    return static_cast<double>(hits) / static_cast<double>(v.size());
  };
  const auto avg = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    return mean(v);
  };
  m.orientation_accuracy = within(orient);
  m.angle_accuracy = within(angle);
  m.location_mean_error = avg(loc);
  m.distance_mean_error = avg(dist);
  m.depth_mean_error = avg(depth);
  return m;
}

}  // namespace forge
