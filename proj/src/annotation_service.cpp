// Copyright 2026 The pcdgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pcdgen/annotation_service.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pcdgen/annotation.hpp"
#include "pcdgen/errors.hpp"

namespace pcdgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".ppm" ||
         ext == ".pgm";
}

std::string content_type(const fs::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".bmp") return "image/bmp";
  return "application/octet-stream";
}

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

struct AnnotationService::Impl {
  httplib::Server server;
  std::mutex write_mutex;
};

AnnotationService::AnnotationService(Options options)
    : options_(std::move(options)), impl_(std::make_unique<Impl>()) {
  if (fs::is_directory(options_.frame_dir)) {
    for (const auto& entry : fs::directory_iterator(options_.frame_dir))
      if (entry.is_regular_file() && is_image(entry.path())) frames_.push_back(entry.path());
  }
  std::sort(frames_.begin(), frames_.end());
  if (frames_.empty()) throw IoFailure("no image frames in " + options_.frame_dir.string());

  auto& srv = impl_->server;
  srv.Get("/frames", [this](const httplib::Request&, httplib::Response& res) {
    json files = json::array();
    for (const fs::path& f : frames_) files.push_back(f.filename().string());
    reply_json(res, 200, {{"count", frames_.size()}, {"files", files}});
  });
  srv.Get(R"(/frames/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
    const long index = std::stol(req.matches[1].str());
    if (index < 1 || index > static_cast<long>(frames_.size())) {
      reply_json(res, 404, {{"ok", false}, {"error", {{"kind", "NotFound"}, {"message", "frame out of range"}}}});
      return;
    }
    const fs::path& path = frames_[static_cast<std::size_t>(index - 1)];
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    res.set_content(ss.str(), content_type(path));
  });
  srv.Get("/meta", [this](const httplib::Request&, httplib::Response& res) {
    json k = options_.object_count >= 0 ? json(options_.object_count) : json(nullptr);
    reply_json(res, 200, {{"K", k}, {"H_s", frames_.size()}});
  });
  srv.Post("/annotation", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const AnnotationSet a = parse_annotation_text(req.body, options_.object_count,
                                                    static_cast<int>(frames_.size()));
      {
        std::lock_guard<std::mutex> lock(impl_->write_mutex);
        write_annotation(a, options_.out_path);
      }
      reply_json(res, 200, {{"ok", true},
                            {"segments", a.segments.size()},
                            {"skills", skills(a).size()},
                            {"warnings", a.warnings}});
    } catch (const Error& e) {
      reply_json(res, 400, {{"ok", false}, {"error", {{"kind", e.kind()}, {"message", e.what()}}}});
    }
  });
  srv.Post(R"(/masks/([A-Za-z0-9_.\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1].str();
    if (name.find("..") != std::string::npos) {
      reply_json(res, 400, {{"ok", false}, {"error", {{"kind", "SchemaError"}, {"message", "bad mask name"}}}});
      return;
    }
    // Stored next to the annotation file, where its "masks" entries resolve.
    const fs::path dir = options_.out_path.has_parent_path() ? options_.out_path.parent_path() : fs::path(".");
    std::lock_guard<std::mutex> lock(impl_->write_mutex);
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out.write(req.body.data(), static_cast<std::streamsize>(req.body.size()));
    if (!out) {
      reply_json(res, 500, {{"ok", false}, {"error", {{"kind", "IoFailure"}, {"message", "cannot store mask"}}}});
      return;
    }
    reply_json(res, 200, {{"ok", true}, {"stored", name}});
  });
  if (!options_.ui_dir.empty()) srv.set_mount_point("/", options_.ui_dir.string());
}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoFailure("cannot bind annotation service");
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoFailure("cannot bind port " + std::to_string(port));
  return port;
}

void AnnotationService::serve() { impl_->server.listen_after_bind(); }

void AnnotationService::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace pcdgen
