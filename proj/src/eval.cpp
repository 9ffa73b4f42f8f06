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

#include "forge/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <sys/wait.h>
#include <unistd.h>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 4> kTable1Categories = {"height", "location", "orientation",
                                                               "multi_object"};
constexpr std::array<std::string_view, 4> kTable1Headers = {"Height", "Location", "Orientation",
                                                            "Multi-Object"};

json box_json(const BBox2D& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

BBox2D box_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw Error("bbox needs 4 numbers");
  return BBox2D{v[0], v[1], v[2], v[3]};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw Error("location needs 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

std::size_t resolve_parallelism(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FORGE_PARALLELISM")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

std::optional<char> original_label(const BenchQuestion& q, std::size_t perm,
                                   const std::string& completion) {
  const auto shown = displayed_options(q, perm);
  const auto label = extract_answer(completion, shown);
  if (!label) return std::nullopt;
  const auto order = option_order(q, perm);
  const std::size_t idx = static_cast<std::size_t>(*label - 'A');
  if (idx >= order.size()) return std::nullopt;
  return q.options[order[idx]].label;
}

// Scores completions[q][p] for questions in id order.
EvalReport score(std::span<const BenchQuestion> questions,
                 const std::vector<std::vector<std::string>>& completions,
                 const EvalOptions& opts) {
  std::vector<std::size_t> idx(questions.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return questions[a].question_id < questions[b].question_id;
  });

  EvalReport report;
  report.permutations = opts.permutations;
  std::map<std::string, CategoryScore> cats;
  std::size_t correct = 0;
  for (std::size_t i : idx) {
    const BenchQuestion& q = questions[i];
    QuestionOutcome o;
    o.question_id = q.question_id;
    o.category = q.category;
    o.completions = completions[i];
    bool all = true;
    for (std::size_t p = 0; p < opts.permutations; ++p) {
      const auto ans = original_label(q, p, completions[i][p]);
      o.answers.push_back(ans);
      all = all && ans && *ans == q.answer;
    }
    o.correct = all;
    o.consistent = o.answers.front().has_value() &&
                   std::all_of(o.answers.begin(), o.answers.end(),
                               [&](const auto& a) { return a == o.answers.front(); });
    auto& c = cats[q.category];
    c.category = q.category;
    ++c.count;
    if (o.correct) {
      ++c.correct;
      ++correct;
    }
    if (opts.scenes != nullptr && !q.scene_id.empty()) {
      auto it = opts.scenes->find(q.scene_id);
      const ParsedTrace parsed = parse_trace(o.completions.front());
      if (it != opts.scenes->end() && parsed.has_think_block) {
        report.attributions.push_back(
            attribute_failure(parsed, it->second, q.answer, q.options, opts.thresholds));
      }
    }
    report.outcomes.push_back(std::move(o));
  }
  for (auto& [name, c] : cats) report.categories.push_back(std::move(c));
  report.mean = questions.empty() ? 0.0
                                  : static_cast<double>(correct) / static_cast<double>(questions.size());
  return report;
}

void check_options(const EvalOptions& opts) {
  if (opts.permutations == 0) throw InvalidConfig("permutations must be >= 1");
}

std::string fmt_opt(const std::optional<double>& v, int decimals = 4) {
  return v ? fmt::format("{:.{}f}", *v, decimals) : std::string("n/a");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out || !(out << content) || !out.flush()) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

}  // namespace

void validate_question(const BenchQuestion& q) {
  if (q.question_id.empty()) throw Error("question without id");
  if (q.options.size() < 2 || q.options.size() > kOptionLabels.size()) {
    throw Error("question '" + q.question_id + "' needs 2 to 4 options");
  }
  std::set<char> labels;
  for (const auto& o : q.options) {
    if (!is_option_label(o.label) || !labels.insert(o.label).second) {
      throw Error("question '" + q.question_id + "' has invalid option labels");
    }
  }
  if (!labels.count(q.answer)) throw Error("question '" + q.question_id + "' answer is not an option");
  if (!q.option_boxes.empty() && q.option_boxes.size() != q.options.size()) {
    throw Error("question '" + q.question_id + "' needs one box per option");
  }
  if (!q.option_locations.empty() && q.option_locations.size() != q.options.size()) {
    throw Error("question '" + q.question_id + "' needs one location per option");
  }
}

nlohmann::json question_to_json(const BenchQuestion& q) {
  json options = json::array();
  for (const auto& o : q.options) {
    json jo{{"label", std::string(1, o.label)}, {"text", o.text}};
    if (!o.key.empty()) jo["key"] = o.key;
    options.push_back(std::move(jo));
  }
  json j{{"question_id", q.question_id},
         {"image_path", q.image_path},
         {"question_text", q.question_text},
         {"options", std::move(options)},
         {"answer", std::string(1, q.answer)},
         {"category", q.category}};
  if (!q.scene_id.empty()) j["scene_id"] = q.scene_id;
  if (q.anchor_box) j["anchor_box"] = box_json(*q.anchor_box);
  if (!q.option_boxes.empty()) {
    json boxes = json::array();
    for (const auto& b : q.option_boxes) boxes.push_back(box_json(b));
    j["option_boxes"] = std::move(boxes);
  }
  if (q.anchor_location) j["anchor_location"] = vec_json(*q.anchor_location);
  if (!q.option_locations.empty()) {
    json locs = json::array();
    for (const auto& v : q.option_locations) locs.push_back(vec_json(v));
    j["option_locations"] = std::move(locs);
  }
  return j;
}

BenchQuestion question_from_json(const nlohmann::json& j) {
  BenchQuestion q;
  q.question_id = j.at("question_id").get<std::string>();
  q.image_path = j.value("image_path", std::string{});
  q.question_text = (j.contains("question_text") ? j.at("question_text") : j.at("question")).get<std::string>();
  const auto& opts = j.at("options");
  if (opts.is_object()) {
    // {"A": "text", ...}
    for (const auto& [label, text] : opts.items()) {
      if (label.size() != 1) throw Error("option label must be one letter");
      q.options.push_back(Option{label[0], text.get<std::string>(), {}});
    }
  } else {
    for (const auto& o : opts) {
      const auto label = o.at("label").get<std::string>();
      if (label.size() != 1) throw Error("option label must be one letter");
      q.options.push_back(Option{label[0], o.at("text").get<std::string>(), o.value("key", std::string{})});
    }
  }
  const auto answer = j.at("answer").get<std::string>();
  if (answer.size() != 1) throw Error("answer must be one letter");
  q.answer = answer[0];
  q.category = j.value("category", std::string("uncategorized"));
  q.scene_id = j.value("scene_id", std::string{});
  if (j.contains("anchor_box")) q.anchor_box = box_from(j.at("anchor_box"));
  if (j.contains("option_boxes")) {
    for (const auto& b : j.at("option_boxes")) q.option_boxes.push_back(box_from(b));
  }
  if (j.contains("anchor_location")) q.anchor_location = vec_from(j.at("anchor_location"));
  if (j.contains("option_locations")) {
    for (const auto& v : j.at("option_locations")) q.option_locations.push_back(vec_from(v));
  }
  validate_question(q);
  return q;
}

std::vector<BenchQuestion> load_bench(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bench file '" + path.string() + "'");
  std::vector<BenchQuestion> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(question_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (!ids.insert(out.back().question_id).second) {
      throw ParseError(line_no, "duplicate question id '" + out.back().question_id + "'");
    }
  }
  return out;
}

void save_bench(std::span<const BenchQuestion> questions, const std::filesystem::path& path) {
  std::string content;
  for (const auto& q : questions) content += question_to_json(q).dump() + "\n";
  write_file(path, content);
}

std::vector<std::size_t> option_order(const BenchQuestion& q, std::size_t index) {
  if (index == 0) {
    std::vector<std::size_t> id(q.options.size());
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
    return id;
  }
  Rng rng(mix_seed(index, "perm/" + q.question_id));
  return rng.permutation(q.options.size());
}

std::vector<Option> displayed_options(const BenchQuestion& q, std::size_t index) {
  std::vector<Option> shown;
  for (std::size_t i : option_order(q, index)) shown.push_back(q.options[i]);
  relabel(shown);
  return shown;
}

Adapter command_adapter(std::string command) {
  return [command = std::move(command)](const AdapterRequest& req) {
    char path[] = "/tmp/forge-prompt-XXXXXX";
    const int fd = ::mkstemp(path);
    if (fd < 0) throw IoError("cannot create prompt file");
    const std::string& data = req.prompt;
    std::size_t written = 0;
    while (written < data.size()) {
      const auto n = ::write(fd, data.data() + written, data.size() - written);
      if (n <= 0) {
        ::close(fd);
        ::unlink(path);
        throw IoError("cannot write prompt file");
      }
      written += static_cast<std::size_t>(n);
    }
    ::close(fd);
    const std::string full = "{ " + command + "\n} < '" + std::string(path) + "'";
    FILE* pipe = ::popen(full.c_str(), "r");
    if (pipe == nullptr) {
      ::unlink(path);
      throw Error("cannot run adapter command");
    }
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = ::pclose(pipe);
    ::unlink(path);
    if (status != 0) throw Error(fmt::format("adapter exited with status {}", WEXITSTATUS(status)));
    return out;
  };
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions file '" + path.string() + "'");
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back(Prediction{j.at("question_id").get<std::string>(),
                               j.value("permutation", std::size_t{0}),
                               j.at("completion").get<std::string>()});
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path) {
  std::string content;
  for (const auto& p : predictions) {
    content += json{{"question_id", p.question_id},
                    {"permutation", p.permutation},
                    {"completion", p.completion}}
                   .dump() +
               "\n";
  }
  write_file(path, content);
}

std::optional<double> CategoryScore::accuracy() const {
  if (count == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(count);
}

EvalReport run_eval(std::span<const BenchQuestion> questions, const Adapter& adapter,
                    const EvalOptions& opts) {
  check_options(opts);
  for (const auto& q : questions) validate_question(q);
  const std::size_t k = opts.permutations;
  std::vector<std::vector<std::string>> completions(questions.size(), std::vector<std::string>(k));
  const std::size_t tasks = questions.size() * k;
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const BenchQuestion& q = questions[t / k];
      const std::size_t p = t % k;
      AdapterRequest req{q.question_id, p, {}, displayed_options(q, p)};
      req.prompt = render_question(q.question_text, req.options);
      try {
        completions[t / k][p] = adapter(req);
      } catch (const std::exception&) {
        completions[t / k][p].clear();  // abstention
      }
    }
  };
  const std::size_t threads = std::min(resolve_parallelism(opts.parallelism), std::max<std::size_t>(tasks, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return score(questions, completions, opts);
}

EvalReport score_predictions(std::span<const BenchQuestion> questions,
                             std::span<const Prediction> predictions, const EvalOptions& opts) {
  check_options(opts);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    validate_question(questions[i]);
    index.emplace(questions[i].question_id, i);
  }
  std::vector<std::vector<std::string>> completions(
      questions.size(), std::vector<std::string>(opts.permutations));
  std::set<std::pair<std::string, std::size_t>> seen;
  for (const auto& p : predictions) {
    if (!seen.emplace(p.question_id, p.permutation).second) {
      throw Error(fmt::format("duplicate prediction for question '{}' permutation {}", p.question_id,
                              p.permutation));
    }
    auto it = index.find(p.question_id);
    if (it == index.end() || p.permutation >= opts.permutations) continue;
    completions[it->second][p.permutation] = p.completion;
  }
  return score(questions, completions, opts);
}

std::vector<Prediction> predictions_from(const EvalReport& report) {
  std::vector<Prediction> out;
  for (const auto& o : report.outcomes) {
    for (std::size_t p = 0; p < o.completions.size(); ++p) {
      out.push_back(Prediction{o.question_id, p, o.completions[p]});
    }
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  std::size_t total = 0, correct = 0, consistent = 0;
  for (const auto& o : report.outcomes) {
    ++total;
    correct += o.correct ? 1 : 0;
    consistent += o.consistent ? 1 : 0;
  }
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& content) {
    write_file(out_dir / name, content);
    written.push_back(out_dir / name);
  };

  emit("summary.tsv",
       fmt::format("metric\tvalue\nquestions\t{}\npermutations\t{}\ncorrect\t{}\n"
                   "mean_accuracy\t{:.6f}\nconsistent\t{}\n",
                   total, report.permutations, correct, report.mean, consistent));

  std::map<std::string, CategoryScore> by_name;
  for (const auto& c : report.categories) by_name[c.category] = c;
  std::string cats = "category\tcount\tcorrect\taccuracy\n";
  const auto cat_row = [&](const std::string& name) {
    const CategoryScore c = by_name.count(name) ? by_name[name] : CategoryScore{name, 0, 0};
    cats += fmt::format("{}\t{}\t{}\t{}\n", name, c.count, c.correct, fmt_opt(c.accuracy(), 6));
  };
  for (auto name : kTable1Categories) cat_row(std::string(name));
  for (const auto& [name, c] : by_name) {
    if (std::find(kTable1Categories.begin(), kTable1Categories.end(), name) == kTable1Categories.end()) {
      cat_row(name);
    }
  }
  emit("categories.tsv", cats);

  std::string t1 = "Mean";
  std::string t1_row = fmt::format("{:.1f}", report.mean * 100.0);
  for (std::size_t i = 0; i < kTable1Categories.size(); ++i) {
    t1 += fmt::format("\t{}", kTable1Headers[i]);
    const auto it = by_name.find(std::string(kTable1Categories[i]));
    const auto acc = it == by_name.end() ? std::nullopt : it->second.accuracy();
    t1_row += "\t" + (acc ? fmt::format("{:.1f}", *acc * 100.0) : std::string("n/a"));
  }
  emit("table1.tsv", t1 + "\n" + t1_row + "\n");

  std::string outcomes = "question_id\tcategory\tcorrect\tconsistent\tanswers\n";
  for (const auto& o : report.outcomes) {
    std::string answers;
    for (const auto& a : o.answers) answers += a ? *a : '-';
    outcomes += fmt::format("{}\t{}\t{}\t{}\t{}\n", o.question_id, o.category, o.correct ? 1 : 0,
                            o.consistent ? 1 : 0, answers);
  }
  emit("outcomes.tsv", outcomes);

  if (!report.attributions.empty()) {
    const FailureMetrics m = failure_metrics(report.attributions);
    std::string attr =
        "questions\tcorrect_rate\tperception_error_rate\tcomputation_error_rate\t"
        "reasoning_error_rate\tformat_error_rate\torientation_accuracy\tlocation_error_m\t"
        "angle_accuracy\tdistance_error_m\tdepth_error_m\n";
    attr += fmt::format("{}\t{:.4f}\t{:.4f}\t{:.4f}\t{:.4f}\t{:.4f}\t{}\t{}\t{}\t{}\t{}\n", m.questions,
                        m.rate(Outcome::correct), m.rate(Outcome::perception_error),
                        m.rate(Outcome::computation_error), m.rate(Outcome::reasoning_error),
                        m.rate(Outcome::format_error), fmt_opt(m.orientation_accuracy),
                        fmt_opt(m.location_mean_error), fmt_opt(m.angle_accuracy),
                        fmt_opt(m.distance_mean_error), fmt_opt(m.depth_mean_error));
    emit("attribution.tsv", attr);
  }
  return written;
}

char bbox_center_heuristic(const BenchQuestion& q) {
  if (!q.anchor_box || q.option_boxes.size() != q.options.size() || q.options.empty()) {
    throw NotApplicable("question '" + q.question_id + "' lacks anchor and candidate boxes");
  }
  const double ax = q.anchor_box->center_x();
  const double ay = q.anchor_box->center_y();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.options.size(); ++i) {
    const double d = std::hypot(q.option_boxes[i].center_x() - ax, q.option_boxes[i].center_y() - ay);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return q.options[best].label;
}

char nearest_3d_rule(const BenchQuestion& q) {
  if (!q.anchor_location || q.option_locations.size() != q.options.size() || q.options.empty()) {
    throw NotApplicable("question '" + q.question_id + "' lacks anchor and candidate locations");
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.options.size(); ++i) {
    const double d = distance(q.option_locations[i], *q.anchor_location);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return q.options[best].label;
}

BaselineReport run_baseline(std::span<const BenchQuestion> questions,
                            const std::function<char(const BenchQuestion&)>& rule) {
  BaselineReport out;
  std::vector<BenchQuestion> applicable;
  std::vector<Prediction> preds;
  for (const auto& q : questions) {
    char label;
    try {
      label = rule(q);
    } catch (const NotApplicable&) {
      ++out.not_applicable;
      continue;
    }
    applicable.push_back(q);
    preds.push_back(Prediction{q.question_id, 0, fmt::format("<answer>{}</answer>", label)});
  }
  EvalOptions opts;
  opts.permutations = 1;
  out.report = score_predictions(applicable, preds, opts);
  return out;
}

}  // namespace forge
