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

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace pcdgen {

// Local HTTP service backing the browser annotation tool.
//
//   GET  /frames         {"count": n, "files": [...]}
//   GET  /frames/{i}     image bytes of frame i (1-based), 404 if out of range
//   GET  /meta           {"K": object count or null, "H_s": n}
//   POST /annotation     validate the body, write it to the output file
//   POST /masks/{name}   store a binary mask next to the output file
//
// Validation failures answer 400 with {"ok": false, "error": {"kind", "message"}}.
class AnnotationService {
 public:
  struct Options {
    std::filesystem::path frame_dir;
    std::filesystem::path out_path;
    int object_count = -1;  // unknown: inferred from the submitted mask list
    std::filesystem::path ui_dir;  // optional static bundle served at /
  };

  explicit AnnotationService(Options options);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  const std::vector<std::filesystem::path>& frames() const { return frames_; }

  // Binds to host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks serving requests until stop() is called.
  void serve();
  void stop();

 private:
  struct Impl;
  Options options_;
  std::vector<std::filesystem::path> frames_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pcdgen
