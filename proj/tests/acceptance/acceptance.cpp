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

// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Geometry>
#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/eval.hpp"
#include "forge/geometry.hpp"
#include "forge/grpo_sim.hpp"
#include "forge/qa.hpp"
#include "forge/relations.hpp"
#include "forge/review.hpp"
#include "forge/reward.hpp"
#include "forge/synthetic.hpp"
#include "forge/trace.hpp"
#include "support/bench.hpp"
#include "support/convert.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/process.hpp"

// After the Eigen-based headers: the socket headers define macros that clash with Eigen.
#include <httplib.h>

using namespace forge;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Criterion 1 ---------------------------------------------------------------

Result geometry_oracle() {
  const auto t0 = Clock::now();
  const SceneSet scenes = random_scenes(1000, 2024);
  Rng rng(7);
  double worst_point = 0.0, worst_dist = 0.0, worst_angle = 0.0, worst_bearing = 0.0;
  std::size_t checks = 0;
  for (const auto& s : scenes) {
    const auto& extr = s.extrinsics;
    const oracle::M3 rot = arr(extr.rotation());
    const oracle::V3 pos = arr(extr.position());
    for (int k = 0; k < 5; ++k) {
      const Vec3 p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.5, 10));
      const Vec3 got = calibrate_point(p, extr);
      const oracle::V3 want = oracle::calibrate(arr(p), rot, pos);
      for (int i = 0; i < 3; ++i) worst_point = std::max(worst_point, std::abs(got[i] - want[i]));
      ++checks;
    }
    for (const auto& a : s.objects) {
      for (const auto& b : s.objects) {
        if (&a == &b) continue;
        worst_dist = std::max(worst_dist, std::abs(distance(a.location, b.location) -
                                                   oracle::distance(arr(a.location), arr(b.location))));
        worst_angle = std::max(worst_angle,
                               std::abs(angular_difference(a.orientation, b.orientation) -
                                        oracle::angle_deg(arr(a.orientation.vec()), arr(b.orientation.vec()))));
        checks += 2;
      }
      const double bearing = horizontal_bearing(s.frame, a.location);
      const double want = oracle::bearing_deg(arr(a.location), arr(s.frame.camera_position),
                                              arr(s.frame.forward.vec()));
      double diff = std::abs(bearing - want);
      diff = std::min(diff, 360.0 - diff);
      worst_bearing = std::max(worst_bearing, diff);
      ++checks;
    }
  }
  const double elapsed = seconds_since(t0);
  Result o;
  o.pass = worst_point <= 1e-9 && worst_dist <= 1e-9 && worst_angle <= 1e-6 &&
           worst_bearing <= 1e-6 && elapsed < 5.0;
  o.detail = fmt::format(
      "{} checks; max errors: point {:.2e} m, distance {:.2e} m, angle {:.2e} deg, bearing {:.2e} deg; "
      "{:.2f} s",
      checks, worst_point, worst_dist, worst_angle, worst_bearing, elapsed);
  return o;
}

// Criterion 2 ---------------------------------------------------------------

// Camera-frame view of a scene, from which a moved scene is re-calibrated.
struct CameraView {
  std::vector<Vec3> points;
  std::vector<Vec3> directions;
};

CameraView camera_view(const SceneAnnotation& s) {
  const Mat3& r = s.extrinsics.rotation();
  const double heading = std::atan2((r * Vec3::UnitZ()).y(), (r * Vec3::UnitZ()).x());
  const double a = heading - std::numbers::pi / 2.0;
  const Eigen::Matrix3d to_world = Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
  const Vec3 ground(s.extrinsics.position().x(), s.extrinsics.position().y(), 0.0);
  CameraView v;
  for (const auto& o : s.objects) {
    const Vec3 world = ground + to_world * o.location;
    v.points.push_back(r.transpose() * (world - s.extrinsics.position()));
    v.directions.push_back(r.transpose() * (to_world * o.orientation.vec()));
  }
  return v;
}

SceneAnnotation moved(const SceneAnnotation& s, const CameraView& view, double yaw_deg, const Vec3& t) {
  const Mat3 rz = Eigen::AngleAxisd(yaw_deg * std::numbers::pi / 180.0, Vec3::UnitZ()).toRotationMatrix();
  const CameraExtrinsics extr(rz * s.extrinsics.rotation(), rz * s.extrinsics.position() + t);
  SceneAnnotation out = s;
  out.extrinsics = extr;
  out.frame = calibrated_frame(extr);
  for (std::size_t i = 0; i < out.objects.size(); ++i) {
    out.objects[i].location = calibrate_point(view.points[i], extr);
    out.objects[i].orientation = calibrate_direction(view.directions[i], extr);
  }
  return out;
}

Result rigid_motion() {
  const auto t0 = Clock::now();
  const SceneSet scenes = random_scenes(200, 99);
  Rng rng(5);
  RelationConfig keep;
  keep.boundary_policy = BoundaryPolicy::keep;
  std::size_t compared = 0, changed = 0;
  for (const auto& s : scenes) {
    const auto base = derive_all(s, keep);
    const CameraView view = camera_view(s);
    for (int k = 0; k < 20; ++k) {
      const Vec3 t(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-0.5, 2.0));
      const auto other = derive_all(moved(s, view, rng.uniform(-180, 180), t), keep);
      if (other.facts.size() != base.facts.size() || other.skipped.size() != base.skipped.size()) {
        changed += base.facts.size();
        compared += base.facts.size();
        continue;
      }
      for (std::size_t i = 0; i < base.facts.size(); ++i) {
        ++compared;
        if (other.facts[i].fact_id() != base.facts[i].fact_id() ||
            other.facts[i].verdict != base.facts[i].verdict) {
          ++changed;
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  Result o;
  o.pass = changed == 0 && compared > 0 && elapsed < 30.0;
  o.detail = fmt::format("{} verdicts compared over 4000 moved scenes, {} changed; {:.2f} s", compared,
                         changed, elapsed);
  return o;
}

// Criterion 3 ---------------------------------------------------------------

RelationFact recompute(const FactKey& key, const SceneAnnotation& s, const RelationConfig& cfg) {
  const auto obj = [&](const std::string& id) -> const ObjectAnnotation& {
    const auto* o = s.find(id);
    if (o == nullptr) throw NotFound(id);
    return *o;
  };
  const auto& a = obj(key.subject_id);
  switch (key.kind) {
    case RelationKind::taller: return compare_height(a, obj(key.object_id), cfg);
    case RelationKind::higher: return compare_height_to_camera(a, s.frame, cfg);
    case RelationKind::closer_to_camera:
      return compare_camera_distance(a, obj(key.object_id), s.frame, cfg);
    case RelationKind::left_of: return viewer_left_right(a, obj(key.object_id), s.frame, cfg);
    case RelationKind::above: return above_below(a, obj(key.object_id), cfg);
    case RelationKind::facing_toward:
      return key.object_id == kCameraId ? facing_camera(a, s.frame, cfg)
                                        : facing_object(a, obj(key.object_id), cfg);
    case RelationKind::facing_same_direction: return facing_same_direction(a, obj(key.object_id), cfg);
    case RelationKind::closer_to_anchor:
      return multi_object_closer_to(obj(key.anchor_id), a, obj(key.object_id), cfg);
    default: throw Error("unexpected kind");
  }
}

Result pipeline_closure() {
  const auto t0 = Clock::now();
  const RelationConfig cfg;
  std::vector<std::pair<QARecord, const SceneAnnotation*>> records;
  const SceneSet scenes = random_scenes(400, 31);
  for (const auto& s : scenes) {
    for (auto& r : gen_srqa(s, derive_all(s, cfg).facts, 17)) records.emplace_back(std::move(r), &s);
    if (records.size() >= 1000) break;
  }
  records.resize(std::min<std::size_t>(records.size(), 1000));

  std::size_t rederived = 0;
  for (const auto& [r, s] : records) {
    const RelationFact f = recompute(parse_fact_id(r.provenance.at(0)), *s, cfg);
    if (f.verdict != Verdict::ambiguous && expected_answer_key(f) == r.answer_option()->key) ++rederived;
  }

  // SR-CoT on every fifth record, spread over kinds.
  std::size_t traces = 0, consistent = 0, round_trips = 0, violations = 0;
  for (std::size_t i = 0; i < records.size() && traces < 200; i += 5) {
    const auto& [r, s] = records[i];
    const CoTTrace t = gen_srcot(r, *s);
    ++traces;
    const ParsedTrace p = parse_trace(render_trace(t));
    const auto report = check_consistency(p, 0.01);
    violations += report.violations.size();
    if (report.violations.empty() && report.unresolved_claims == 0) ++consistent;
    if (p.steps == t.steps && p.answer == t.final_answer) ++round_trips;
  }
  const double elapsed = seconds_since(t0);
  Result o;
  o.pass = records.size() == 1000 && rederived == 1000 && traces == 200 && consistent == 200 &&
           round_trips == 200;
  o.detail = fmt::format(
      "{} SR-QA records, {} re-derived; {} SR-CoT traces, {} consistent ({} violations), {} exact "
      "round-trips; {:.2f} s",
      records.size(), rederived, traces, consistent, violations, round_trips, elapsed);
  return o;
}

// Criterion 4 ---------------------------------------------------------------

Result reward_suite() {
  Rng rng(4242);
  QARecord rec;
  rec.record_id = "fuzz";
  rec.question_text = "Which?";
  rec.options = {{'A', "left", "l"}, {'B', "right", "r"}, {'C', "above", "a"}, {'D', "below", "b"}};
  rec.answer = 'C';
  RewardConfig cfg;
  cfg.weights = preset_weights(RewardPreset::zero_3drwd);
  std::size_t out_of_range = 0;
  for (int i = 0; i < 10000; ++i) {
    rec.category = static_cast<QACategory>(rng.index(8));
    const auto b = score_completion(gen::completion_text(rng), rec, cfg);
    const auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
    const bool ok = (b.accuracy == 0.0 || b.accuracy == 1.0) && (b.format == 0.0 || b.format == 1.0) &&
                    in01(b.reasoning_steps) && in01(b.process_3d);
    out_of_range += ok ? 0 : 1;
  }

  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    GrpoConfig g;
    g.group_size = 2 + rng.index(15);
    const auto r = gen::reward_group(rng, g.group_size);
    const auto adv = grpo_advantages(r, g).advantages;
    const auto st = oracle::population_stats(r);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double want = st.std > 1e-8L ? static_cast<double>((r[k] - st.mean) / st.std) : 0.0;
      worst = std::max(worst, std::abs(adv[k] - want));
    }
  }

  GrpoConfig four;
  four.group_size = 4;
  const auto exact = grpo_advantages(std::vector<double>{1, 0, 0, 1}, four).advantages;
  const bool exact_ok = exact == std::vector<double>{1, -1, -1, 1};

  Result o;
  o.pass = out_of_range == 0 && worst <= 1e-12 && exact_ok;
  o.detail = fmt::format(
      "10000 fuzzed completions, {} out of range; 1000 groups, max |advantage - oracle| {:.2e}; "
      "[1,0,0,1] -> [{},{},{},{}]",
      out_of_range, worst, exact[0], exact[1], exact[2], exact[3]);
  return o;
}

// Criterion 5 ---------------------------------------------------------------

Result grpo_kl_ablation() {
  const auto t0 = Clock::now();
  const auto bank = toy_bank(64, 100);
  bool ok = true;
  std::string runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig cfg;
    cfg.bank = bank;
    cfg.seed = seed;
    const double free = run_simulation(cfg).final_accuracy;
    cfg.kl_weight = 0.04;
    const double tied = run_simulation(cfg).final_accuracy;
    ok = ok && free >= 0.95 && tied <= free;
    runs += fmt::format("{}seed {}: {:.3f} vs {:.3f}", seed == 1 ? "" : "; ", seed, free, tied);
  }
  const double elapsed = seconds_since(t0);
  Result o;
  o.pass = ok && elapsed < 60.0;
  o.detail = fmt::format("final accuracy kl=0 vs kl=0.04 ({}); {:.2f} s", runs, elapsed);
  return o;
}

// Criterion 6 ---------------------------------------------------------------

Result shortcut_baseline() {
  const auto perturbed = bench::random_closer_bench(1000, 808);
  Rng rng(9);
  std::size_t invariant = 0;
  for (auto q : perturbed) {
    const char before = bbox_center_heuristic(q);
    const auto inflate = [&](BBox2D& b) {
      const double s = rng.uniform(0.2, 4.0);
      const double cx = b.center_x(), cy = b.center_y();
      const double hw = b.width() / 2 * s, hh = b.height() / 2 * rng.uniform(0.2, 4.0);
      b = BBox2D{cx - hw, cy - hh, cx + hw, cy + hh};
    };
    inflate(*q.anchor_box);
    for (auto& b : q.option_boxes) inflate(b);
    invariant += bbox_center_heuristic(q) == before;
  }

  const auto no_shortcut = bench::no_shortcut_bench(500, 88);
  const double heuristic = run_baseline(no_shortcut).report.mean;
  const double rule = run_baseline(no_shortcut, nearest_3d_rule).report.mean;

  Result o;
  o.pass = invariant == 1000 && heuristic <= 0.40 && rule == 1.0;
  o.detail = fmt::format("center-only invariance {}/1000; no-shortcut bank: heuristic {:.1f}%, 3D rule {:.1f}%",
                         invariant, heuristic * 100.0, rule * 100.0);

  // Conditional reproduction of the published heuristic scores.
  struct Target {
    const char* env;
    const char* name;
    double percent;
  };
  const Target targets[] = {{"FORGE_3DSRBENCH", "3DSRBench multi-object closer-to", 34.3},
                            {"FORGE_CVBENCH3D", "CVBench-3D distance", 80.2}};
  for (const auto& t : targets) {
    const char* path = std::getenv(t.env);
    if (path == nullptr || !fs::exists(path)) {
      o.detail += fmt::format("; {} check skipped ({} not set)", t.name, t.env);
      continue;
    }
    const auto report = run_baseline(load_bench(path));
    const double got = report.report.mean * 100.0;
    const bool hit = std::abs(got - t.percent) <= 1.0;
    o.pass = o.pass && hit;
    o.detail += fmt::format("; {}: {:.1f}% (target {:.1f}% +/- 1.0, {} not applicable)", t.name, got,
                            t.percent, report.not_applicable);
  }
  return o;
}

// Criterion 7 ---------------------------------------------------------------

struct PlantedTrace {
  ParsedTrace parsed;
  double oracle_orientation_error = 0.0;
};

// Trace over the first two objects of `s` with a controlled orientation tilt,
// an optionally wrong distance claim and an optionally wrong final label.
PlantedTrace planted_trace(const SceneAnnotation& s, double tilt_deg, bool bad_math, bool bad_answer) {
  const auto& a = s.objects[0];
  const auto& b = s.objects[1];
  Vec3 axis = a.orientation.vec().cross(Vec3::UnitZ());
  if (axis.norm() < 1e-6) axis = Vec3::UnitX();
  const Vec3 dir =
      Eigen::AngleAxisd(tilt_deg * std::numbers::pi / 180.0, axis.normalized()) * a.orientation.vec();
  const auto rounded = [](const Vec3& v) { return Vec3(round2(v.x()), round2(v.y()), round2(v.z())); };
  CoTTrace t;
  t.steps.push_back(orientation_step("First,", "the a", a.object_id, dir));
  t.steps.push_back(location_step("Next,", "the a", a.object_id, a.location));
  t.steps.push_back(location_step("Next,", "the b", b.object_id, b.location));
  const double d = distance(rounded(a.location), rounded(b.location)) + (bad_math ? 1.0 : 0.0);
  t.steps.push_back(computation_step("Then,", Metric::distance, "the a", a.object_id, "the b", b.object_id, d));
  const char label = bad_answer ? 'B' : 'A';
  t.steps.push_back(reasoning_step("Finally,", fmt::format("it is {{{}}}", a.object_id), {a.object_id}, label));
  t.final_answer = label;
  PlantedTrace out{parse_trace(render_trace(t)), 0.0};
  out.oracle_orientation_error = oracle::angle_deg(arr(*out.parsed.steps[0].vector), arr(a.orientation.vec()));
  return out;
}

Result attribution_protocol() {
  SyntheticOptions two;
  two.min_objects = 2;
  const SceneSet scenes = random_scenes(200, 71, two);
  const std::vector<Option> options{{'A', "the first", "a"}, {'B', "the second", "b"}};
  Rng rng(3);
  std::vector<FailureAttribution> items;
  std::size_t within = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& s = scenes[i % scenes.size()];
    const std::size_t bucket = i % 10;  // 0-2 perception, 3-4 computation, 5 reasoning, rest correct
    const double tilt = bucket < 3 ? rng.uniform(33, 120) : rng.uniform(0, 27);
    const PlantedTrace p = planted_trace(s, tilt, bucket == 3 || bucket == 4, bucket == 5);
    within += p.oracle_orientation_error <= 30.0 ? 1 : 0;
    items.push_back(attribute_failure(p.parsed, s, 'A', options));
  }
  const FailureMetrics m = failure_metrics(items);
  const double oracle_orient = static_cast<double>(within) / 1000.0;

  const auto probe = [&](double deg) {
    return attribute_failure(planted_trace(scenes[0], deg, false, false).parsed, scenes[0], 'A', options)
        .outcome;
  };
  const Outcome at29 = probe(29.0);
  const Outcome at31 = probe(31.0);

  Result o;
  o.pass = m.rate(Outcome::perception_error) == 0.3 && m.rate(Outcome::computation_error) == 0.2 &&
           m.rate(Outcome::reasoning_error) == 0.1 && m.rate(Outcome::correct) == 0.4 &&
           m.orientation_accuracy.has_value() && *m.orientation_accuracy == oracle_orient &&
           at29 == Outcome::correct && at31 == Outcome::perception_error;
  o.detail = fmt::format(
      "planted 30/20/10/40%, recovered {:.1f}/{:.1f}/{:.1f}/{:.1f}%; orientation accuracy {:.3f} "
      "(oracle {:.3f}); 29 deg -> {}, 31 deg -> {}",
      m.rate(Outcome::perception_error) * 100, m.rate(Outcome::computation_error) * 100,
      m.rate(Outcome::reasoning_error) * 100, m.rate(Outcome::correct) * 100,
      m.orientation_accuracy.value_or(-1.0), oracle_orient, to_string(at29), to_string(at31));
  return o;
}

// Criterion 8 ---------------------------------------------------------------

Result eval_harness(const fs::path& workdir) {
  const auto qs = bench::random_closer_bench(2000, 515);
  EvalOptions opts;
  opts.permutations = 3;
  const double oracle_mean = run_eval(qs, bench::oracle_adapter(qs), opts).mean;

  bool constant_ok = true;
  std::string constant;
  for (std::size_t k = 1; k <= 3; ++k) {
    EvalOptions ok;
    ok.permutations = k;
    const double mean = run_eval(qs, bench::constant_adapter('A'), ok).mean;
    const double expected = std::pow(0.25, static_cast<double>(k));
    const double sigma = std::sqrt(expected * (1 - expected) / static_cast<double>(qs.size()));
    constant_ok = constant_ok && std::abs(mean - expected) <= 4 * sigma;
    constant += fmt::format("{}k={}: {:.4f} (expected {:.4f})", k == 1 ? "" : ", ", k, mean, expected);
  }

  const Adapter noisy = [](const AdapterRequest& req) {
    Rng local(fnv1a(req.question_id) ^ req.permutation);
    if (local.index(3) == 0) return std::string("no idea");
    return fmt::format("<think>x</think><answer>{}</answer>", "ABCD"[local.index(4)]);
  };
  const auto report = run_eval(qs, noisy, opts);
  const fs::path preds = workdir / "predictions.jsonl";
  save_predictions(predictions_from(report), preds);
  const bool replay_ok = score_predictions(qs, load_predictions(preds), opts) == report;

  Result o;
  o.pass = oracle_mean == 1.0 && constant_ok && replay_ok;
  o.detail = fmt::format("oracle adapter {:.3f}; constant 'A' {}; replay from predictions {}", oracle_mean,
                         constant, replay_ok ? "bit-exact" : "differs");
  return o;
}

// Criterion 9 ---------------------------------------------------------------

struct Banner {
  int port = 0;
  std::size_t items = 0;
  std::size_t replayed = 0;
};

Banner read_banner(proc::Child& child) {
  const auto line = child.read_line(20000);
  if (!line) throw std::runtime_error("service printed no banner");
  Banner b;
  b.port = proc::parse_port(*line);
  const auto open = line->find('(');
  std::sscanf(line->c_str() + open, "(%zu items, %zu replayed", &b.items, &b.replayed);
  return b;
}

ReviewVerdict planned_verdict(const std::string& item_id) {
  const auto h = fnv1a(item_id) % 10;
  return h < 6 ? ReviewVerdict::accept : h < 8 ? ReviewVerdict::reject : ReviewVerdict::skip;
}

Result verify_service(const std::string& forge_cli, const fs::path& workdir) {
  constexpr std::size_t kVerdicts = 500;
  constexpr int kPollers = 8;
  const fs::path scenes_path = workdir / "service_scenes.jsonl";
  const fs::path log_path = workdir / "service_log.jsonl";
  const fs::path export_path = workdir / "service_export.jsonl";
  fs::remove(log_path);
  save_scenes(random_scenes(150, 77), scenes_path);
  const std::vector<std::string> argv{forge_cli, "serve", "--scenes", scenes_path.string(),
                                      "--verdict-log", log_path.string(), "--port", "0"};

  std::mutex mu;
  std::set<std::string> leased;
  std::map<std::string, ReviewVerdict> planned;
  std::set<std::pair<std::string, std::string>> accepted_objects;
  std::size_t duplicates = 0, rejected_posts = 0, empty_queue = 0;
  Banner first;
  {
    proc::Child child(argv);
    first = read_banner(child);
    std::atomic<long> budget{static_cast<long>(kVerdicts)};
    std::vector<std::thread> pollers;
    for (int r = 0; r < kPollers; ++r) {
      pollers.emplace_back([&, r] {
        httplib::Client cli("127.0.0.1", first.port);
        const std::string reviewer = fmt::format("reviewer{}", r);
        while (budget.fetch_sub(1) > 0) {
          auto res = cli.Get("/items/next?reviewer=" + reviewer);
          if (!res || res->status != 200) {
            std::lock_guard lock(mu);
            ++empty_queue;
            return;
          }
          const auto item = nlohmann::json::parse(res->body);
          const std::string id = item.at("item_id");
          const ReviewVerdict v = planned_verdict(id);
          {
            std::lock_guard lock(mu);
            if (!leased.insert(id).second) ++duplicates;
            planned[id] = v;
            if (v == ReviewVerdict::accept && item.contains("object_id")) {
              accepted_objects.emplace(item.at("scene_id"), item.at("object_id"));
            }
          }
          const nlohmann::json body{{"verdict", to_string(v)}, {"reviewer", reviewer}};
          auto post = cli.Post("/items/" + id + "/verdict", body.dump(), "application/json");
          if (!post || post->status != 200) {
            std::lock_guard lock(mu);
            ++rejected_posts;
          }
        }
      });
    }
    for (auto& t : pollers) t.join();
    child.kill(SIGKILL);
  }

  std::size_t want[3] = {0, 0, 0};
  for (const auto& [id, v] : planned) ++want[static_cast<int>(v)];

  Banner second;
  nlohmann::json stats;
  {
    proc::Child child(argv);
    second = read_banner(child);
    httplib::Client cli("127.0.0.1", second.port);
    auto res = cli.Get("/stats");
    if (res && res->status == 200) stats = nlohmann::json::parse(res->body);
    child.kill(SIGKILL);
  }
  const bool stats_ok = stats.is_object() && stats.value("accepted", 0u) == want[0] &&
                        stats.value("rejected", 0u) == want[1] && stats.value("skipped", 0u) == want[2];

  {
    proc::Child exporter({forge_cli, "export", "--scenes", scenes_path.string(), "--verdict-log",
                          log_path.string(), "--out", export_path.string()});
    exporter.read_line(60000);
  }
  std::set<std::pair<std::string, std::string>> exported;
  std::set<std::string> exported_scenes, oracle_scenes;
  for (const auto& s : load_scenes(export_path)) {
    exported_scenes.insert(s.scene_id);
    for (const auto& o : s.objects) exported.emplace(s.scene_id, o.object_id);
  }
  for (const auto& [scene, obj] : accepted_objects) oracle_scenes.insert(scene);

  Result o;
  o.pass = first.items >= kVerdicts && leased.size() == kVerdicts && duplicates == 0 &&
           rejected_posts == 0 && empty_queue == 0 && second.replayed == kVerdicts && stats_ok &&
           exported == accepted_objects && exported_scenes == oracle_scenes;
  o.detail = fmt::format(
      "{} items, {} pollers, {} verdicts ({} duplicate leases, {} failed posts); after SIGKILL {} replayed, "
      "stats accepted/rejected/skipped {}/{}/{} (planned {}/{}/{}); export {} objects in {} scenes "
      "(oracle {} in {})",
      first.items, kPollers, leased.size(), duplicates, rejected_posts, second.replayed,
      stats.value("accepted", 0u), stats.value("rejected", 0u), stats.value("skipped", 0u), want[0], want[1],
      want[2], exported.size(), exported_scenes.size(), accepted_objects.size(), oracle_scenes.size());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge acceptance checks"};
  std::string forge_cli;
  std::string workdir = "acceptance_work";
  app.add_option("--forge", forge_cli, "Path to the forge CLI")->required();
  app.add_option("--workdir", workdir);
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"geometry matches independent oracle", geometry_oracle},
      {"relations invariant under rigid motion", rigid_motion},
      {"SR-QA and SR-CoT close over the relation engine", pipeline_closure},
      {"rewards bounded and advantages exact", reward_suite},
      {"GRPO simulator learns and KL does not help", grpo_kl_ablation},
      {"2D shortcut baseline", shortcut_baseline},
      {"failure attribution recovers planted rates", attribution_protocol},
      {"evaluation harness", [&] { return eval_harness(workdir); }},
      {"verification service survives a hard kill", [&] { return verify_service(forge_cli, workdir); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = Result{false, std::string("exception: ") + e.what()};
    }
    failed += r.pass ? 0 : 1;
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << name << ": " << r.detail << '\n' << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
