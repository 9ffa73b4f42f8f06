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

#include "forge/review_server.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>

#include "forge/error.hpp"

namespace forge {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

std::string content_type_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

}  // namespace

struct ReviewServer::Impl {
  ReviewQueue& queue;
  ServerOptions opts;
  httplib::Server server;
  bool bound = false;

  Impl(ReviewQueue& q, ServerOptions o) : queue(q), opts(std::move(o)) { routes(); }

  void routes() {
    server.Get("/items/next", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string reviewer = req.get_param_value("reviewer");
      if (reviewer.empty()) return send_error(res, 400, "reviewer is required");
      const auto item = queue.next_item(reviewer);
      if (!item) {
        res.status = 204;
        return;
      }
      send_json(res, 200, to_json(*item));
    });

    server.Post(R"(/items/([^/]+)/verdict)", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        return send_error(res, 400, "body must be JSON");
      }
      try {
        const auto verdict = parse_review_verdict(body.at("verdict").get<std::string>());
        const auto reviewer = body.at("reviewer").get<std::string>();
        queue.submit_verdict(req.matches[1], verdict, reviewer);
      } catch (const NotFound& e) {
        return send_error(res, 404, e.what());
      } catch (const Conflict& e) {
        return send_error(res, 409, e.what());
      } catch (const IoError& e) {
        return send_error(res, 500, e.what());
      } catch (const std::exception& e) {
        return send_error(res, 400, e.what());
      }
      send_json(res, 200, json{{"item_id", req.matches[1]}, {"status", "recorded"}});
    });

    server.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, to_json(queue.stats()));
    });

    server.Get(R"(/media/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto scene = queue.scene(req.matches[1]);
      if (!scene) return send_error(res, 404, "unknown scene");
      std::filesystem::path path = scene->image_path;
      if (path.is_relative() && !opts.media_root.empty()) path = opts.media_root / path;
      std::ifstream in(path, std::ios::binary);
      if (!in) return send_error(res, 404, "image not found");
      std::ostringstream bytes;
      bytes << in.rdbuf();
      res.set_content(bytes.str(), content_type_for(path));
    });

    if (!opts.static_dir.empty()) server.set_mount_point("/", opts.static_dir.string());
  }
};

ReviewServer::ReviewServer(ReviewQueue& queue, ServerOptions opts)
    : impl_(std::make_unique<Impl>(queue, std::move(opts))) {}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind() {
  int port = impl_->opts.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->opts.host);
  } else if (!impl_->server.bind_to_port(impl_->opts.host, port)) {
    port = -1;
  }
  if (port < 0) throw IoError("cannot bind " + impl_->opts.host + ":" + std::to_string(impl_->opts.port));
  impl_->opts.port = port;
  impl_->bound = true;
  return port;
}

void ReviewServer::listen() {
  if (!impl_->bound) bind();
  impl_->server.listen_after_bind();
}

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace forge
