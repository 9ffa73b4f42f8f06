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

#include <filesystem>
#include <memory>
#include <string>

#include "forge/review.hpp"

namespace forge {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path media_root;  // relative image paths resolve here
  std::filesystem::path static_dir;  // optional client assets served at /
};

/// Request/response API over `queue`:
///   GET  /items/next?reviewer=<tag>   200 item | 204 empty
///   POST /items/<id>/verdict          {verdict, reviewer} -> 200 | 404 | 409
///   GET  /stats                       counts per status
///   GET  /media/<scene_id>            image bytes
class ReviewServer {
 public:
  ReviewServer(ReviewQueue& queue, ServerOptions opts);
  ~ReviewServer();

  /// Binds the listening socket and returns the bound port.
  int bind();
  /// Serves until stop(); binds first when needed.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace forge
