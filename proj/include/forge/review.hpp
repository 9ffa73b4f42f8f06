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

#pragma once

// Human-verification queue: unverified objects and near-margin relation facts
// are leased to reviewers; verdicts go to an append-only, fsync'd log that is
// replayed at startup.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/relations.hpp"
#include "forge/scene.hpp"

namespace forge {

enum class ItemStatus { pending, accepted, rejected, skipped };
enum class ReviewVerdict { accept, reject, skip };

std::string_view to_string(ItemStatus s);
std::string_view to_string(ReviewVerdict v);
ReviewVerdict parse_review_verdict(std::string_view text);

struct Segment2D {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  friend bool operator==(const Segment2D&, const Segment2D&) = default;
};

struct Overlay {
  std::string object_id;
  BBox2D box;
  Segment2D arrow;  // projected orientation, pixels
  friend bool operator==(const Overlay&, const Overlay&) = default;
};

struct ReviewItem {
  std::string item_id;
  std::string scene_id;
  std::string object_id;  // object items
  std::string fact_id;    // fact items
  std::string image_path;
  std::vector<Overlay> overlays;
  std::string fact_text;
  ItemStatus status = ItemStatus::pending;
  std::string reviewer;
  std::int64_t timestamp_ms = 0;
  std::int64_t lease_expiry_ms = 0;  // 0 when not leased

  friend bool operator==(const ReviewItem&, const ReviewItem&) = default;
};

nlohmann::json to_json(const ReviewItem& item);

/// Orientation arrow from the box center: the calibrated direction is rotated
/// back into the camera frame and its image-plane part scaled to half the
/// smaller box side.
Segment2D project_arrow(const ObjectAnnotation& object, const CameraExtrinsics& extrinsics);

std::string object_item_id(std::string_view scene_id, std::string_view object_id);
std::string fact_item_id(std::string_view fact_id);

struct QueueStats {
  std::size_t enqueued = 0;
  std::size_t pending = 0;  // not leased
  std::size_t leased = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t skipped = 0;

  friend bool operator==(const QueueStats&, const QueueStats&) = default;
};

nlohmann::json to_json(const QueueStats& s);

/// Milliseconds; injectable for tests.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

struct ReviewOptions {
  std::int64_t lease_ms = 10 * 60 * 1000;
  std::filesystem::path verdict_log;  // empty: in-memory only
  RelationConfig relation_config;     // used when re-deriving facts on export
};

class ReviewQueue {
 public:
  /// Enqueues `scenes` and `facts`, then replays the verdict log if it exists.
  ReviewQueue(SceneSet scenes, std::span<const RelationFact> facts, ReviewOptions opts = {},
              Clock clock = system_clock());
  ~ReviewQueue();
  ReviewQueue(const ReviewQueue&) = delete;
  ReviewQueue& operator=(const ReviewQueue&) = delete;

  /// One item per unverified object and per near-margin fact not seen before.
  /// Returns the number of new items.
  std::size_t enqueue(const SceneSet& scenes, std::span<const RelationFact> facts);

  /// Oldest pending item not under an active lease, now leased to `reviewer`.
  std::optional<ReviewItem> next_item(const std::string& reviewer);

  /// Throws NotFound for unknown ids and Conflict unless the item is leased to
  /// `reviewer`. The verdict is durable before this returns.
  void submit_verdict(const std::string& item_id, ReviewVerdict verdict, const std::string& reviewer);

  QueueStats stats() const;
  std::optional<ReviewItem> item(const std::string& item_id) const;
  std::optional<SceneAnnotation> scene(const std::string& scene_id) const;
  /// Current scenes with verdicts applied.
  SceneSet scenes() const;

  /// Scenes restricted to accepted objects; writes a facts file re-derived
  /// on them when `facts_path` is given. Returns the number of scenes written.
  std::size_t export_verified(const std::filesystem::path& scenes_path,
                              const std::filesystem::path& facts_path = {}) const;

  /// Verdict log lines replayed at construction.
  std::size_t replayed() const { return replayed_; }

 private:
  void apply(ReviewItem& item, ReviewVerdict verdict, const std::string& reviewer, std::int64_t now);
  void append_log(const nlohmann::json& line);

  ReviewOptions opts_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  SceneSet scenes_;
  std::map<std::string, std::size_t> scene_index_;
  std::vector<ReviewItem> items_;  // enqueue order
  std::map<std::string, std::size_t> item_index_;
  std::size_t replayed_ = 0;
  int log_fd_ = -1;
};

}  // namespace forge
