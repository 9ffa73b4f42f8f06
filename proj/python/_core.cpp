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

// Python bindings. Structured values cross the boundary as plain dicts/lists
// using the same JSON layout as the on-disk files.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/eval.hpp"
#include "forge/geometry.hpp"
#include "forge/grpo_sim.hpp"
#include "forge/qa.hpp"
#include "forge/relations.hpp"
#include "forge/reward.hpp"
#include "forge/scene.hpp"
#include "forge/scene_filter.hpp"
#include "forge/synthetic.hpp"
#include "forge/trace.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_py(const json& j) {
  // Leaked on purpose: destroying it after interpreter shutdown would need the GIL.
  static auto* loads = new py::object(py::module_::import("json").attr("loads"));
  return (*loads)(j.dump());
}

json from_py(const py::handle& obj) {
  static auto* dumps = new py::object(py::module_::import("json").attr("dumps"));
  return json::parse((*dumps)(obj).cast<std::string>());
}

forge::Vec3 vec(const std::vector<double>& v) {
  if (v.size() != 3) throw forge::Error("expected 3 numbers");
  return {v[0], v[1], v[2]};
}

std::vector<double> list(const forge::Vec3& v) { return {v.x(), v.y(), v.z()}; }

forge::CameraExtrinsics extrinsics(const std::vector<double>& rotation,
                                   const std::vector<double>& position) {
  if (rotation.size() != 9) throw forge::Error("rotation needs 9 row-major numbers");
  forge::Mat3 r;
  for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = rotation[static_cast<std::size_t>(i)];
  return forge::CameraExtrinsics(r, vec(position));
}

forge::SceneAnnotation scene(const py::handle& obj) { return forge::scene_from_json(from_py(obj)); }

forge::QARecord record(const py::handle& obj) { return forge::record_from_json(from_py(obj)); }

py::list facts_list(const std::vector<forge::RelationFact>& facts) {
  py::list out;
  for (const auto& f : facts) out.append(to_py(forge::fact_to_json(f)));
  return out;
}

std::vector<forge::RelationFact> facts_from(const py::iterable& items) {
  std::vector<forge::RelationFact> out;
  for (const auto& f : items) out.push_back(forge::fact_from_json(from_py(f)));
  return out;
}

py::dict report_dict(const forge::EvalReport& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["permutations"] = r.permutations;
  py::dict cats;
  for (const auto& c : r.categories) {
    cats[py::str(c.category)] = py::make_tuple(c.count, c.correct);
  }
  d["categories"] = cats;
  py::list outcomes;
  for (const auto& o : r.outcomes) {
    py::dict od;
    od["question_id"] = o.question_id;
    od["category"] = o.category;
    od["correct"] = o.correct;
    od["consistent"] = o.consistent;
    outcomes.append(od);
  }
  d["outcomes"] = outcomes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Explicit-3D spatial reasoning toolkit: geometry, relations, data synthesis, "
            "trace checking, rewards, GRPO simulation and evaluation.";

  py::register_exception<forge::Error>(m, "ForgeError", PyExc_ValueError);

  // geometry
  m.def("calibrate_point",
        [](const std::vector<double>& p, const std::vector<double>& rotation,
           const std::vector<double>& position) {
          return list(forge::calibrate_point(vec(p), extrinsics(rotation, position)));
        },
        py::arg("camera_point"), py::arg("rotation"), py::arg("position"));
  m.def("level_rotation",
        [](double yaw, double pitch, double roll) {
          const auto e = forge::CameraExtrinsics::from_angles(yaw, pitch, roll, forge::Vec3::Zero());
          std::vector<double> out;
          for (int i = 0; i < 9; ++i) out.push_back(e.rotation()(i / 3, i % 3));
          return out;
        },
        py::arg("yaw_deg") = 0.0, py::arg("pitch_deg") = 0.0, py::arg("roll_deg") = 0.0,
        "Row-major camera-to-world rotation for the given yaw/pitch/roll.");
  m.def("distance", [](const std::vector<double>& a, const std::vector<double>& b) {
    return forge::distance(vec(a), vec(b));
  });
  m.def("angular_difference", [](const std::vector<double>& a, const std::vector<double>& b) {
    return forge::angular_difference(forge::UnitVec3::normalize(vec(a)),
                                     forge::UnitVec3::normalize(vec(b)));
  });
  m.def("horizontal_bearing",
        [](const std::vector<double>& point, const std::vector<double>& camera_position,
           const std::vector<double>& forward) {
          const forge::CalibratedFrame frame{vec(camera_position),
                                             forge::UnitVec3::normalize(vec(forward)),
                                             std::string(forge::kCalibratedConvention)};
          return forge::horizontal_bearing(frame, vec(point));
        },
        py::arg("point"), py::arg("camera_position"), py::arg("forward"),
        "Degrees, positive to the viewer's right.");

  // scenes and relations
  m.def("random_scenes",
        [](std::size_t n, std::uint64_t seed) {
          py::list out;
          for (const auto& s : forge::random_scenes(n, seed)) out.append(to_py(forge::scene_to_json(s)));
          return out;
        },
        py::arg("n"), py::arg("seed") = 1);
  m.def("validate_scene", [](const py::dict& s) { forge::validate_scene(scene(s)); });
  m.def("derive_relations",
        [](const py::dict& s, const py::object& cfg) {
          const auto c = cfg.is_none() ? forge::RelationConfig{} : forge::relation_config_from_json(from_py(cfg));
          return facts_list(forge::derive_all(scene(s), c).facts);
        },
        py::arg("scene"), py::arg("config") = py::none());
  m.def("filter_scenes",
        [](const py::list& scenes, const py::object& cfg) {
          forge::SceneSet set;
          for (const auto& s : scenes) set.push_back(scene(s));
          const auto c = cfg.is_none() ? forge::FilterConfig{} : forge::filter_config_from_json(from_py(cfg));
          auto [kept, report] = forge::filter_scenes(set, c);
          py::list out;
          for (const auto& s : kept) out.append(to_py(forge::scene_to_json(s)));
          return py::make_tuple(out, to_py(forge::to_json(report)));
        },
        py::arg("scenes"), py::arg("config") = py::none());

  // data synthesis
  m.def("gen_basic3d", [](const py::dict& s, std::uint64_t seed) {
    py::list out;
    for (const auto& r : forge::gen_basic3d(scene(s), seed)) out.append(to_py(forge::record_to_json(r)));
    return out;
  }, py::arg("scene"), py::arg("seed") = 1);
  m.def("gen_srqa",
        [](const py::dict& s, const py::object& facts, std::uint64_t seed) {
          const auto sc = scene(s);
          const auto fs = facts.is_none() ? forge::derive_all(sc, {}).facts : facts_from(facts);
          py::list out;
          for (const auto& r : forge::gen_srqa(sc, fs, seed)) out.append(to_py(forge::record_to_json(r)));
          return out;
        },
        py::arg("scene"), py::arg("facts") = py::none(), py::arg("seed") = 1);
  m.def("gen_srcot",
        [](const py::dict& rec, const py::dict& s) {
          const auto r = record(rec);
          const auto trace = forge::gen_srcot(r, scene(s));
          return forge::render_record(r, &trace);
        },
        py::arg("record"), py::arg("scene"), "Rendered question with its reasoning trace.");

  // traces
  m.def("parse_trace", [](const std::string& text) {
    const auto p = forge::parse_trace(text);
    py::dict d;
    d["answer"] = p.answer ? py::object(py::str(std::string(1, *p.answer))) : py::object(py::none());
    d["steps"] = p.steps.size();
    d["warnings"] = p.warnings;
    d["has_think_block"] = p.has_think_block;
    d["has_answer_block"] = p.has_answer_block;
    return d;
  });
  m.def("check_consistency",
        [](const std::string& text, double tol) {
          const auto r = forge::check_consistency(forge::parse_trace(text), tol);
          py::dict d;
          d["checked_claims"] = r.checked_claims;
          d["violations"] = r.violations.size();
          d["unresolved_claims"] = r.unresolved_claims;
          return d;
        },
        py::arg("text"), py::arg("tol") = 0.01);
  m.def("is_well_formed", [](const std::string& text) { return forge::is_well_formed(text); });

  // rewards
  m.def("accuracy_reward", [](const std::string& text, const py::dict& rec) {
    return forge::accuracy_reward(text, record(rec));
  });
  m.def("format_reward", [](const std::string& text) { return forge::format_reward(text); });
  m.def("reasoning_steps_reward", [](const std::string& text) { return forge::reasoning_steps_reward(text); });
  m.def("process_reward_3d",
        [](const std::string& text, const std::vector<std::string>& terms, bool all_or_nothing) {
          return forge::process_reward_3d(text, terms, all_or_nothing);
        },
        py::arg("text"), py::arg("terms"), py::arg("all_or_nothing") = false);
  m.def("score_completion",
        [](const std::string& text, const py::dict& rec, const std::string& preset) {
          forge::RewardConfig cfg;
          cfg.weights = forge::preset_weights(forge::parse_preset(preset));
          return to_py(forge::to_json(forge::score_completion(text, record(rec), cfg)));
        },
        py::arg("text"), py::arg("record"), py::arg("preset") = "final");
  m.def("grpo_advantages",
        [](const std::vector<double>& rewards, double epsilon) {
          forge::GrpoConfig cfg{rewards.size(), 0.0, epsilon};
          return forge::grpo_advantages(rewards, cfg).advantages;
        },
        py::arg("rewards"), py::arg("epsilon") = 1e-8);
  m.def("kl_penalty", &forge::kl_penalty, py::arg("logprob_current"), py::arg("logprob_reference"),
        py::arg("kl_weight"));

  // simulation
  m.def("run_simulation",
        [](const py::list& bank, double kl_weight, std::size_t steps, std::uint64_t seed,
           const std::string& preset, double learning_rate) {
          forge::SimConfig cfg;
          for (const auto& r : bank) cfg.bank.push_back(record(r));
          cfg.kl_weight = kl_weight;
          cfg.steps = steps;
          cfg.seed = seed;
          cfg.preset = forge::parse_preset(preset);
          cfg.learning_rate = learning_rate;
          const auto rep = forge::run_simulation(cfg);
          py::dict d;
          d["train_accuracy"] = rep.train_accuracy;
          d["policy_accuracy"] = rep.policy_accuracy;
          d["mean_length"] = rep.mean_length;
          d["initial_accuracy"] = rep.initial_accuracy;
          d["final_accuracy"] = rep.final_accuracy;
          return d;
        },
        py::arg("bank"), py::arg("kl_weight") = 0.0, py::arg("steps") = 300, py::arg("seed") = 1,
        py::arg("preset") = "final", py::arg("learning_rate") = 0.5);

  // evaluation
  m.def("bbox_center_heuristic", [](const py::dict& q) {
    return std::string(1, forge::bbox_center_heuristic(forge::question_from_json(from_py(q))));
  });
  m.def("score_predictions",
        [](const py::list& bench, const py::list& predictions, std::size_t permutations) {
          std::vector<forge::BenchQuestion> qs;
          for (const auto& q : bench) qs.push_back(forge::question_from_json(from_py(q)));
          std::vector<forge::Prediction> ps;
          for (const auto& p : predictions) {
            const json j = from_py(p);
            ps.push_back({j.at("question_id").get<std::string>(), j.value("permutation", std::size_t{0}),
                          j.at("completion").get<std::string>()});
          }
          forge::EvalOptions opts;
          opts.permutations = permutations;
          return report_dict(forge::score_predictions(qs, ps, opts));
        },
        py::arg("bench"), py::arg("predictions"), py::arg("permutations") = 2);
  m.def("displayed_prompt", [](const py::dict& q, std::size_t permutation) {
    const auto bq = forge::question_from_json(from_py(q));
    return forge::render_question(bq.question_text, forge::displayed_options(bq, permutation));
  }, py::arg("question"), py::arg("permutation") = 0);

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
