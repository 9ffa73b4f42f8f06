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

#include "forge/review.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>

#include <fcntl.h>
#include <fmt/format.h>
#include <unistd.h>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {
namespace {

using nlohmann::json;

std::string hex_id(std::string_view prefix, std::string_view key) {
  return fmt::format("{}-{:016x}", prefix, fnv1a(key));
}

std::string fact_text(const RelationFact& f, const SceneAnnotation& scene) {
  const auto name = [&](const std::string& id) {
    if (id == kCameraId) return std::string("the camera");
    const auto* o = scene.find(id);
    return o != nullptr ? o->display_name() : id;
  };
  std::string text = fmt::format("{} {} {}", name(f.subject_id), to_string(f.kind), name(f.object_id));
  if (!f.anchor_id.empty()) text += fmt::format(" relative to {}", name(f.anchor_id));
  return text + fmt::format(": {} (gap {:.2f}, threshold {:.2f})", to_string(f.verdict),
                            f.margin_value, f.threshold);
}

Overlay overlay_for(const ObjectAnnotation& o, const SceneAnnotation& scene) {
  return Overlay{o.object_id, o.bbox2d, project_arrow(o, scene.extrinsics)};
}

}  // namespace

std::string_view to_string(ItemStatus s) {
  switch (s) {
    case ItemStatus::pending: return "pending";
    case ItemStatus::accepted: return "accepted";
    case ItemStatus::rejected: return "rejected";
    case ItemStatus::skipped: return "skipped";
  }
  return "pending";
}

std::string_view to_string(ReviewVerdict v) {
  switch (v) {
    case ReviewVerdict::accept: return "accept";
    case ReviewVerdict::reject: return "reject";
    case ReviewVerdict::skip: return "skip";
  }
  return "skip";
}

ReviewVerdict parse_review_verdict(std::string_view text) {
  if (text == "accept" || text == "accepted") return ReviewVerdict::accept;
  if (text == "reject" || text == "rejected") return ReviewVerdict::reject;
  if (text == "skip" || text == "skipped") return ReviewVerdict::skip;
  throw Error("unknown verdict '" + std::string(text) + "'");
}

nlohmann::json to_json(const ReviewItem& item) {
  json overlays = json::array();
  for (const auto& o : item.overlays) {
    overlays.push_back({{"object_id", o.object_id},
                        {"bbox", {o.box.x_min, o.box.y_min, o.box.x_max, o.box.y_max}},
                        {"arrow", {o.arrow.x0, o.arrow.y0, o.arrow.x1, o.arrow.y1}}});
  }
  json j{{"item_id", item.item_id},
         {"scene_id", item.scene_id},
         {"image_path", item.image_path},
         {"media_url", "/media/" + item.scene_id},
         {"overlays", std::move(overlays)},
         {"fact_text", item.fact_text},
         {"status", to_string(item.status)},
         {"reviewer", item.reviewer},
         {"timestamp_ms", item.timestamp_ms},
         {"lease_expiry_ms", item.lease_expiry_ms}};
  if (!item.object_id.empty()) j["object_id"] = item.object_id;
  if (!item.fact_id.empty()) j["fact_id"] = item.fact_id;
  return j;
}

Segment2D project_arrow(const ObjectAnnotation& o, const CameraExtrinsics& extr) {
  const double cx = o.bbox2d.center_x();
  const double cy = o.bbox2d.center_y();
  const Vec3 cam = uncalibrate_direction(o.orientation, extr);
  const double planar = std::hypot(cam.x(), cam.y());
  if (planar < 1e-9) return Segment2D{cx, cy, cx, cy};
  const double len = 0.5 * std::min(o.bbox2d.width(), o.bbox2d.height());
  return Segment2D{cx, cy, cx + len * cam.x() / planar, cy + len * cam.y() / planar};
}

std::string object_item_id(std::string_view scene_id, std::string_view object_id) {
  return hex_id("obj", std::string(scene_id) + "/" + std::string(object_id));
}

std::string fact_item_id(std::string_view fact_id) { return hex_id("fact", fact_id); }

nlohmann::json to_json(const QueueStats& s) {
  return {{"enqueued", s.enqueued}, {"pending", s.pending},   {"leased", s.leased},
          {"accepted", s.accepted}, {"rejected", s.rejected}, {"skipped", s.skipped}};
}

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

ReviewQueue::ReviewQueue(SceneSet scenes, std::span<const RelationFact> facts, ReviewOptions opts,
                         Clock clock)
    : opts_(std::move(opts)), clock_(std::move(clock)) {
  if (opts_.lease_ms <= 0) throw InvalidConfig("lease window must be positive");
  enqueue(scenes, facts);
  if (opts_.verdict_log.empty()) return;

  if (std::ifstream in(opts_.verdict_log); in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        continue;  // torn trailing write
      }
      auto it = item_index_.find(j.value("item_id", std::string{}));
      if (it == item_index_.end()) continue;
      ReviewItem& item = items_[it->second];
      if (item.status != ItemStatus::pending) continue;
      apply(item, parse_review_verdict(j.at("verdict").get<std::string>()),
            j.value("reviewer", std::string{}), j.value("timestamp_ms", std::int64_t{0}));
      ++replayed_;
    }
  }
  log_fd_ = ::open(opts_.verdict_log.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log_fd_ < 0) throw IoError("cannot open verdict log '" + opts_.verdict_log.string() + "'");
}

ReviewQueue::~ReviewQueue() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

std::size_t ReviewQueue::enqueue(const SceneSet& scenes, std::span<const RelationFact> facts) {
  std::unique_lock lock(mutex_);
  std::size_t added = 0;
  const std::int64_t now = clock_();
  for (const auto& s : scenes) {
    if (scene_index_.count(s.scene_id)) continue;
    scene_index_.emplace(s.scene_id, scenes_.size());
    scenes_.push_back(s);
  }
  const auto add = [&](ReviewItem item) {
    if (item_index_.count(item.item_id)) return;
    item.timestamp_ms = now;
    item_index_.emplace(item.item_id, items_.size());
    items_.push_back(std::move(item));
    ++added;
  };
  for (const auto& s : scenes) {
    const SceneAnnotation& stored = scenes_[scene_index_.at(s.scene_id)];
    for (const auto& o : stored.objects) {
      if (o.verified != Verification::unverified) continue;
      ReviewItem item;
      item.item_id = object_item_id(stored.scene_id, o.object_id);
      item.scene_id = stored.scene_id;
      item.object_id = o.object_id;
      item.image_path = stored.image_path;
      item.overlays.push_back(overlay_for(o, stored));
      item.fact_text = fmt::format("{} at {} facing {}", o.display_name(), format_vec(o.location),
                                   format_vec(o.orientation.vec()));
      add(std::move(item));
    }
  }
  for (const auto& f : facts) {
    if (!is_near_margin(f)) continue;
    auto sit = scene_index_.find(f.scene_id);
    if (sit == scene_index_.end()) continue;
    const SceneAnnotation& scene = scenes_[sit->second];
    ReviewItem item;
    item.fact_id = f.fact_id();
    item.item_id = fact_item_id(item.fact_id);
    item.scene_id = scene.scene_id;
    item.image_path = scene.image_path;
    for (const auto* id : {&f.subject_id, &f.object_id, &f.anchor_id}) {
      if (const auto* o = scene.find(*id)) item.overlays.push_back(overlay_for(*o, scene));
    }
    item.fact_text = fact_text(f, scene);
    add(std::move(item));
  }
  return added;
}

std::optional<ReviewItem> ReviewQueue::next_item(const std::string& reviewer) {
  std::unique_lock lock(mutex_);
  const std::int64_t now = clock_();
  for (auto& item : items_) {
    if (item.status != ItemStatus::pending || item.lease_expiry_ms > now) continue;
    item.reviewer = reviewer;
    item.lease_expiry_ms = now + opts_.lease_ms;
    item.timestamp_ms = std::max(item.timestamp_ms, now);
    return item;
  }
  return std::nullopt;
}

void ReviewQueue::submit_verdict(const std::string& item_id, ReviewVerdict verdict,
                                 const std::string& reviewer) {
  std::unique_lock lock(mutex_);
  auto it = item_index_.find(item_id);
  if (it == item_index_.end()) throw NotFound("unknown item '" + item_id + "'");
  ReviewItem& item = items_[it->second];
  const std::int64_t now = clock_();
  if (item.status != ItemStatus::pending) throw Conflict("item '" + item_id + "' is already resolved");
  if (item.lease_expiry_ms <= now || item.reviewer != reviewer) {
    throw Conflict("item '" + item_id + "' is not leased to '" + reviewer + "'");
  }
  const std::int64_t ts = std::max(item.timestamp_ms, now);
  append_log({{"item_id", item_id},
              {"verdict", to_string(verdict)},
              {"reviewer", reviewer},
              {"timestamp_ms", ts}});
  apply(item, verdict, reviewer, ts);
}

void ReviewQueue::apply(ReviewItem& item, ReviewVerdict verdict, const std::string& reviewer,
                        std::int64_t now) {
  item.status = verdict == ReviewVerdict::accept   ? ItemStatus::accepted
                : verdict == ReviewVerdict::reject ? ItemStatus::rejected
                                                   : ItemStatus::skipped;
  item.reviewer = reviewer;
  item.lease_expiry_ms = 0;
  item.timestamp_ms = std::max(item.timestamp_ms, now);
  if (item.object_id.empty() || verdict == ReviewVerdict::skip) return;
  SceneAnnotation& scene = scenes_[scene_index_.at(item.scene_id)];
  for (auto& o : scene.objects) {
    if (o.object_id == item.object_id) {
      o.verified = verdict == ReviewVerdict::accept ? Verification::accepted : Verification::rejected;
    }
  }
}

void ReviewQueue::append_log(const nlohmann::json& line) {
  if (log_fd_ < 0) return;
  const std::string data = line.dump() + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const auto n = ::write(log_fd_, data.data() + written, data.size() - written);
    if (n <= 0) throw IoError("verdict log write failed");
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(log_fd_) != 0) throw IoError("verdict log fsync failed");
}

QueueStats ReviewQueue::stats() const {
  std::shared_lock lock(mutex_);
  const std::int64_t now = clock_();
  QueueStats s;
  s.enqueued = items_.size();
  for (const auto& item : items_) {
    switch (item.status) {
      case ItemStatus::pending:
        (item.lease_expiry_ms > now ? s.leased : s.pending)++;
        break;
      case ItemStatus::accepted: ++s.accepted; break;
      case ItemStatus::rejected: ++s.rejected; break;
      case ItemStatus::skipped: ++s.skipped; break;
    }
  }
  return s;
}

std::optional<ReviewItem> ReviewQueue::item(const std::string& item_id) const {
  std::shared_lock lock(mutex_);
  auto it = item_index_.find(item_id);
  if (it == item_index_.end()) return std::nullopt;
  return items_[it->second];
}

std::optional<SceneAnnotation> ReviewQueue::scene(const std::string& scene_id) const {
  std::shared_lock lock(mutex_);
  auto it = scene_index_.find(scene_id);
  if (it == scene_index_.end()) return std::nullopt;
  return scenes_[it->second];
}

SceneSet ReviewQueue::scenes() const {
  std::shared_lock lock(mutex_);
  return scenes_;
}

std::size_t ReviewQueue::export_verified(const std::filesystem::path& scenes_path,
                                         const std::filesystem::path& facts_path) const {
  const SceneSet verified = accepted_only(scenes());
  save_scenes(verified, scenes_path);
  if (!facts_path.empty()) {
    FactsFile file;
    file.config = opts_.relation_config;
    for (const auto& s : verified) {
      DerivedFacts derived = derive_all(s, opts_.relation_config);
      file.facts.insert(file.facts.end(), derived.facts.begin(), derived.facts.end());
      file.skipped.insert(file.skipped.end(), derived.skipped.begin(), derived.skipped.end());
    }
    save_facts(file, facts_path);
  }
  return verified.size();
}

}  // namespace forge
