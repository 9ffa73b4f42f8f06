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

// forge: command-line front end for the spatial-reasoning data and evaluation toolkit.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <pthread.h>

#include "forge/error.hpp"
#include "forge/eval.hpp"
#include "forge/grpo_sim.hpp"
#include "forge/qa.hpp"
#include "forge/relations.hpp"
#include "forge/review.hpp"
#include "forge/review_server.hpp"
#include "forge/reward.hpp"
#include "forge/scene.hpp"
#include "forge/scene_filter.hpp"
#include "forge/synthetic.hpp"
#include "forge/trace.hpp"

using namespace forge;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return json::parse(in);
}

std::vector<RelationFact> facts_for(const SceneSet& scenes, const std::string& facts_path,
                                    const RelationConfig& cfg) {
  if (!facts_path.empty()) return load_facts(facts_path).facts;
  std::vector<RelationFact> facts;
  for (const auto& s : scenes) {
    auto derived = derive_all(s, cfg);
    facts.insert(facts.end(), derived.facts.begin(), derived.facts.end());
  }
  return facts;
}

std::map<std::string, SceneAnnotation> index_scenes(const SceneSet& scenes) {
  std::map<std::string, SceneAnnotation> out;
  for (const auto& s : scenes) out.emplace(s.scene_id, s);
  return out;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: explicit-3D spatial reasoning data, rewards and evaluation"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write seeded random scenes");
  std::size_t synth_count = 10;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  bool synth_verified = false;
  synth->add_option("--count", synth_count)->default_val(10);
  synth->add_option("--seed", synth_seed)->default_val(1);
  synth->add_option("--out", synth_out)->required();
  synth->add_flag("--verified", synth_verified, "Mark objects accepted and scenes human-verified");

  // filter
  auto* filter = app.add_subcommand("filter", "Remove cluttered, excluded and boundary scenes");
  std::string filter_in, filter_out, filter_cfg_path, filter_boundary;
  std::size_t filter_max = 10;
  std::vector<std::string> filter_exclude;
  filter->add_option("--scenes", filter_in)->required();
  filter->add_option("--out", filter_out)->required();
  filter->add_option("--config", filter_cfg_path, "FilterConfig JSON");
  filter->add_option("--max-objects", filter_max);
  filter->add_option("--exclude", filter_exclude, "Excluded categories");
  filter->add_option("--boundary", filter_boundary)->check(CLI::IsMember({"keep", "discard"}));

  // mix
  auto* mix = app.add_subcommand("mix", "Combine verified scenes with a sampled unverified fraction");
  std::string mix_verified, mix_unverified, mix_out;
  double mix_fraction = 0.0;
  std::uint64_t mix_seed_v = 1;
  mix->add_option("--verified", mix_verified)->required();
  mix->add_option("--unverified", mix_unverified)->required();
  mix->add_option("--fraction", mix_fraction)->required()->check(CLI::Range(0.0, 1.0));
  mix->add_option("--seed", mix_seed_v)->default_val(1);
  mix->add_option("--out", mix_out)->required();

  // relations
  auto* rel = app.add_subcommand("relations", "Derive relation facts");
  std::string rel_in, rel_out, rel_cfg_path;
  rel->add_option("--scenes", rel_in)->required();
  rel->add_option("--out", rel_out)->required();
  rel->add_option("--config", rel_cfg_path, "RelationConfig JSON");

  // gen
  auto* gen = app.add_subcommand("gen", "Synthesize Basic3D, SR-QA or SR-CoT records");
  std::string gen_scenes, gen_facts, gen_variant, gen_out, gen_templates;
  std::uint64_t gen_seed = 1;
  long gen_limit = -1;
  bool gen_cannot_tell = false;
  gen->add_option("--scenes", gen_scenes)->required();
  gen->add_option("--facts", gen_facts, "Facts file (derived on the fly when omitted)");
  gen->add_option("--variant", gen_variant)->required()->check(CLI::IsMember({"basic3d", "srqa", "srcot", "sr_qa", "sr_cot"}));
  gen->add_option("--seed", gen_seed)->default_val(1);
  gen->add_option("--limit", gen_limit, "Maximum records (default: corpus size of the variant)");
  gen->add_option("--templates", gen_templates, "Template bank JSON");
  gen->add_flag("--cannot-tell", gen_cannot_tell, "Add a 'cannot tell' option to binary questions");
  gen->add_option("--out", gen_out)->required();

  // verify-traces
  auto* vt = app.add_subcommand("verify-traces", "Check SR-CoT records for numeric consistency");
  std::string vt_records, vt_scenes;
  double vt_tol = 0.01;
  vt->add_option("--records", vt_records)->required();
  vt->add_option("--scenes", vt_scenes)->required();
  vt->add_option("--tol", vt_tol)->default_val(0.01);

  // reward
  auto* rw = app.add_subcommand("reward", "Score completions with the reward suite");
  std::string rw_records, rw_completions, rw_preset = "final", rw_out;
  rw->add_option("--records", rw_records)->required();
  rw->add_option("--completions", rw_completions, "Lines of {record_id, completion}")->required();
  rw->add_option("--preset", rw_preset)->check(CLI::IsMember({"final", "zero", "zero-3drwd"}));
  rw->add_option("--out", rw_out);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the toy GRPO simulator");
  std::string sim_bank, sim_preset = "final", sim_out;
  SimConfig sim_cfg;
  std::size_t sim_toy = 0;
  auto* bank_opt = sim->add_option("--bank", sim_bank, "Records file used as the question bank");
  auto* toy_opt = sim->add_option("--toy", sim_toy, "Use a generated four-option bank of this size");
  bank_opt->excludes(toy_opt);
  sim->add_option("--preset", sim_preset)->check(CLI::IsMember({"final", "zero", "zero-3drwd"}));
  sim->add_option("--kl", sim_cfg.kl_weight);
  sim->add_option("--steps", sim_cfg.steps);
  sim->add_option("--seed", sim_cfg.seed);
  sim->add_option("--lr", sim_cfg.learning_rate);
  sim->add_option("--group-size", sim_cfg.group_size);
  sim->add_option("--temperature", sim_cfg.temperature);
  sim->add_option("--out", sim_out, "TSV curve file");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a model adapter or recorded predictions");
  std::string ev_bench, ev_adapter, ev_predictions, ev_out, ev_scenes, ev_record;
  std::size_t ev_perms = 2;
  ev->add_option("--bench", ev_bench)->required();
  auto* adapter_opt = ev->add_option("--adapter", ev_adapter, "Command reading the prompt on stdin");
  auto* pred_opt = ev->add_option("--predictions", ev_predictions);
  adapter_opt->excludes(pred_opt);
  ev->add_option("--permutations", ev_perms)->default_val(2);
  ev->add_option("--scenes", ev_scenes, "Scenes for failure attribution");
  ev->add_option("--record", ev_record, "Write adapter completions as a predictions file");
  ev->add_option("--out", ev_out)->required();

  // baseline-2d
  auto* bl = app.add_subcommand("baseline-2d", "Score the bbox-center heuristic");
  std::string bl_bench, bl_out;
  bl->add_option("--bench", bl_bench)->required();
  bl->add_option("--out", bl_out)->required();

  // serve
  auto* sv = app.add_subcommand("serve", "Run the human-verification service");
  std::string sv_scenes, sv_facts, sv_log, sv_host = "127.0.0.1", sv_media, sv_static;
  int sv_port = 8080;
  double sv_lease_min = 10.0;
  sv->add_option("--scenes", sv_scenes)->required();
  sv->add_option("--facts", sv_facts);
  sv->add_option("--verdict-log", sv_log)->required();
  sv->add_option("--port", sv_port)->default_val(8080);
  sv->add_option("--host", sv_host);
  sv->add_option("--media-root", sv_media);
  sv->add_option("--static", sv_static, "Directory of client assets");
  sv->add_option("--lease-minutes", sv_lease_min)->default_val(10.0);

  // export
  auto* ex = app.add_subcommand("export", "Export accepted objects after replaying a verdict log");
  std::string ex_scenes, ex_facts, ex_log, ex_out, ex_facts_out;
  ex->add_option("--scenes", ex_scenes)->required();
  ex->add_option("--facts", ex_facts);
  ex->add_option("--verdict-log", ex_log)->required();
  ex->add_option("--out", ex_out)->required();
  ex->add_option("--facts-out", ex_facts_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      SyntheticOptions opts;
      if (synth_verified) {
        opts.verified = Verification::accepted;
        opts.source = SceneSource::human_verified;
      }
      const auto n = save_scenes(random_scenes(synth_count, synth_seed, opts), synth_out);
      print({{"scenes", n}});
    } else if (filter->parsed()) {
      FilterConfig cfg;
      if (!filter_cfg_path.empty()) cfg = filter_config_from_json(read_json_file(filter_cfg_path));
      if (filter->count("--max-objects")) cfg.max_objects = filter_max;
      for (const auto& c : filter_exclude) cfg.excluded_categories.insert(c);
      if (!filter_boundary.empty()) {
        cfg.boundary_policy = filter_boundary == "keep" ? BoundaryPolicy::keep : BoundaryPolicy::discard;
      }
      auto [scenes, report] = filter_scenes(load_scenes(filter_in), cfg);
      save_scenes(scenes, filter_out);
      print(to_json(report));
    } else if (mix->parsed()) {
      const auto out = mix_datasets(load_scenes(mix_verified), load_scenes(mix_unverified),
                                    mix_fraction, mix_seed_v);
      print({{"scenes", save_scenes(out, mix_out)}});
    } else if (rel->parsed()) {
      RelationConfig cfg;
      if (!rel_cfg_path.empty()) cfg = relation_config_from_json(read_json_file(rel_cfg_path));
      FactsFile file{cfg, {}, {}};
      for (const auto& s : load_scenes(rel_in)) {
        auto d = derive_all(s, cfg);
        file.facts.insert(file.facts.end(), d.facts.begin(), d.facts.end());
        file.skipped.insert(file.skipped.end(), d.skipped.begin(), d.skipped.end());
      }
      save_facts(file, rel_out);
      print({{"facts", file.facts.size()}, {"skipped", file.skipped.size()}});
    } else if (gen->parsed()) {
      QAConfig cfg;
      cfg.cannot_tell_option = gen_cannot_tell;
      if (!gen_templates.empty()) cfg.templates = TemplateBank::load(gen_templates);
      const Variant variant = parse_variant(gen_variant);
      const SceneSet scenes = load_scenes(gen_scenes);
      const std::size_t limit =
          gen_limit >= 0 ? static_cast<std::size_t>(gen_limit)
          : variant == Variant::basic3d ? cfg.sizes.basic3d
          : variant == Variant::sr_qa   ? cfg.sizes.sr_qa
                                        : cfg.sizes.sr_cot;
      std::vector<RecordLine> lines;
      std::size_t skipped = 0;
      if (variant == Variant::basic3d) {
        for (const auto& s : scenes) {
          for (auto& r : gen_basic3d(s, gen_seed, cfg)) {
            if (lines.size() < limit) lines.push_back({std::move(r), std::nullopt});
          }
        }
      } else {
        const auto facts = facts_for(scenes, gen_facts, RelationConfig{});
        std::map<std::string, std::vector<RelationFact>> by_scene;
        for (const auto& f : facts) by_scene[f.scene_id].push_back(f);
        for (const auto& s : scenes) {
          for (auto& r : gen_srqa(s, by_scene[s.scene_id], gen_seed, cfg)) {
            if (lines.size() >= limit) break;
            if (variant == Variant::sr_qa) {
              lines.push_back({std::move(r), std::nullopt});
              continue;
            }
            r.variant = Variant::sr_cot;
            r.record_id = "srcot:" + r.record_id.substr(r.record_id.find(':') + 1);
            try {
              const CoTTrace trace = gen_srcot(r, s);
              std::string text = render_record(r, &trace);
              lines.push_back({std::move(r), std::move(text)});
            } catch (const Error&) {
              ++skipped;  // answer flips under 2-decimal rendering
            }
          }
        }
      }
      save_records(lines, gen_out);
      print({{"records", lines.size()}, {"skipped", skipped}, {"variant", to_string(variant)}});
    } else if (vt->parsed()) {
      const auto scenes = index_scenes(load_scenes(vt_scenes));
      std::size_t checked = 0, violations = 0, unresolved = 0, wrong_answer = 0, malformed = 0;
      for (const auto& line : load_records(vt_records)) {
        if (line.record.variant != Variant::sr_cot || !line.text) continue;
        ++checked;
        const ParsedTrace parsed = parse_trace(*line.text);
        if (!is_well_formed(*line.text)) ++malformed;
        const auto report = check_consistency(parsed, vt_tol);
        violations += report.violations.size();
        unresolved += report.unresolved_claims;
        if (parsed.answer != line.record.answer) ++wrong_answer;
        if (!scenes.count(line.record.scene_id)) {
          throw NotFound("record '" + line.record.record_id + "' references unknown scene");
        }
      }
      print({{"checked", checked},
             {"violations", violations},
             {"unresolved_claims", unresolved},
             {"answer_mismatches", wrong_answer},
             {"malformed", malformed}});
      return violations + wrong_answer + malformed == 0 ? 0 : 2;
    } else if (rw->parsed()) {
      RewardConfig cfg;
      cfg.weights = preset_weights(parse_preset(rw_preset));
      std::map<std::string, QARecord> records;
      for (auto& line : load_records(rw_records)) records.emplace(line.record.record_id, line.record);
      std::ifstream in(rw_completions);
      if (!in) throw IoError("cannot open '" + rw_completions + "'");
      std::ofstream file;
      if (!rw_out.empty()) {
        file.open(rw_out, std::ios::trunc);
        if (!file) throw IoError("cannot write '" + rw_out + "'");
      }
      std::ostream& out = rw_out.empty() ? std::cout : file;
      std::string text;
      std::size_t line_no = 0, scored = 0;
      double total = 0.0;
      while (std::getline(in, text)) {
        ++line_no;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
          j = json::parse(text);
        } catch (const json::exception& e) {
          throw ParseError(line_no, e.what());
        }
        const auto id = j.at("record_id").get<std::string>();
        auto it = records.find(id);
        if (it == records.end()) throw NotFound("unknown record '" + id + "'");
        const auto b = score_completion(j.at("completion").get<std::string>(), it->second, cfg);
        json row = to_json(b);
        row["record_id"] = id;
        out << row.dump() << '\n';
        total += b.composite;
        ++scored;
      }
      std::cerr << fmt::format("scored {} completions, mean composite {:.4f}\n", scored,
                               scored ? total / static_cast<double>(scored) : 0.0);
    } else if (sim->parsed()) {
      if (sim_bank.empty() == (sim_toy == 0)) {
        throw InvalidConfig("exactly one of --bank and --toy is required");
      }
      if (sim_toy > 0) {
        sim_cfg.bank = toy_bank(sim_toy, sim_cfg.seed);
      } else {
        for (auto& line : load_records(sim_bank)) sim_cfg.bank.push_back(std::move(line.record));
      }
      sim_cfg.preset = parse_preset(sim_preset);
      const SimReport report = run_simulation(sim_cfg);
      if (!sim_out.empty()) {
        std::ofstream out(sim_out, std::ios::trunc);
        if (!(out << report_to_tsv(report))) throw IoError("cannot write '" + sim_out + "'");
      }
      print({{"initial_accuracy", report.initial_accuracy},
             {"final_accuracy", report.final_accuracy},
             {"final_mean_length", report.mean_length.back()},
             {"steps", report.policy_accuracy.size()}});
    } else if (ev->parsed()) {
      if (ev_adapter.empty() == ev_predictions.empty()) {
        throw InvalidConfig("exactly one of --adapter and --predictions is required");
      }
      const auto bench = load_bench(ev_bench);
      std::map<std::string, SceneAnnotation> scenes;
      EvalOptions opts;
      opts.permutations = ev_perms;
      if (!ev_scenes.empty()) {
        scenes = index_scenes(load_scenes(ev_scenes));
        opts.scenes = &scenes;
      }
      const EvalReport report = ev_adapter.empty()
                                    ? score_predictions(bench, load_predictions(ev_predictions), opts)
                                    : run_eval(bench, command_adapter(ev_adapter), opts);
      if (!ev_record.empty()) save_predictions(predictions_from(report), ev_record);
      emit_report(report, ev_out);
      print({{"questions", report.outcomes.size()},
             {"mean_accuracy", report.mean},
             {"permutations", report.permutations}});
    } else if (bl->parsed()) {
      const auto result = run_baseline(load_bench(bl_bench));
      emit_report(result.report, bl_out);
      print({{"applicable", result.report.outcomes.size()},
             {"not_applicable", result.not_applicable},
             {"accuracy", result.report.mean}});
    } else if (sv->parsed()) {
      // Signals are handled on a dedicated thread so stop() runs outside a handler.
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);

      const SceneSet scenes = load_scenes(sv_scenes);
      const auto facts = facts_for(scenes, sv_facts, RelationConfig{});
      ReviewOptions opts;
      opts.verdict_log = sv_log;
      opts.lease_ms = static_cast<std::int64_t>(sv_lease_min * 60'000.0);
      ReviewQueue queue(scenes, facts, opts);
      ServerOptions sopts;
      sopts.host = sv_host;
      sopts.port = sv_port;
      sopts.media_root = sv_media.empty() ? std::filesystem::path(sv_scenes).parent_path()
                                          : std::filesystem::path(sv_media);
      sopts.static_dir = sv_static;
      ReviewServer server(queue, sopts);
      const int port = server.bind();
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
      });
      const auto st = queue.stats();
      std::cout << fmt::format("listening on {}:{} ({} items, {} replayed verdicts)\n", sv_host, port,
                               st.enqueued, queue.replayed())
                << std::flush;
      server.listen();
      pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
    } else if (ex->parsed()) {
      const SceneSet scenes = load_scenes(ex_scenes);
      const auto facts = facts_for(scenes, ex_facts, RelationConfig{});
      ReviewOptions opts;
      opts.verdict_log = ex_log;
      ReviewQueue queue(scenes, facts, opts);
      print({{"scenes", queue.export_verified(ex_out, ex_facts_out)},
             {"replayed", queue.replayed()}});
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
