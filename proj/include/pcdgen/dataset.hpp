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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcdgen/augment.hpp"
#include "pcdgen/config.hpp"

namespace pcdgen {

namespace fs = std::filesystem;

// One source demonstration: a parsed-scene directory and its annotation file.
struct DatasetSource {
  fs::path scene;
  fs::path annotation;
};

// dataset.json at the root of a generated dataset.
struct DatasetInfo {
  std::uint64_t seed = 0;
  PipelineConfig config;
  std::vector<DatasetSource> sources;
  std::set<std::uint16_t> nonrigid_ids;
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::vector<std::string> warnings;
  std::optional<CameraModel> effective_camera;  // set once camera-aware processing ran
};

nlohmann::json dataset_info_to_json(const DatasetInfo& info);
DatasetInfo dataset_info_from_json(const nlohmann::json& j);
DatasetInfo read_dataset_info(const fs::path& root);

std::string demo_name(std::size_t index);  // gen_%06d
std::string plan_name(std::size_t index);  // plan_%06d.json

// Generated demo directory: a demonstration container plus annotation.json,
// generation.json (tuple indices, source frame map) and poses/obj_%d.bin.
void write_generated(const GeneratedDemo& demo, const std::vector<int>& object_ids, const fs::path& root,
                     const std::optional<CameraModel>& effective_camera = std::nullopt);

struct GeneratedRecord {
  std::string name;
  Demonstration demo;
  std::optional<CameraModel> effective_camera;
  AnnotationSet annotation;
  nlohmann::json generation;
  std::vector<int> source_frames;
  std::vector<std::vector<Pose>> object_poses;  // [frame][object in id order]
  GroupTransformPlan plan;
  int source = 0;
};

GeneratedRecord read_generated(const fs::path& root, const std::string& name, const std::vector<int>& object_ids);

// Names of generated demo directories under root, sorted.
std::vector<std::string> list_generated(const fs::path& root);

// Frames of `demo` processed with a fixed shrink rectangle (ignored by
// expand mode).
Demonstration process_demo(const Demonstration& demo, const ProcessorConfig& cfg, const PixelRect& rect,
                           CameraModel* effective_camera);

// Coverage shared by every frame of `demo`.
CoverageMask demo_coverage(const Demonstration& demo, const ProcessorConfig& cfg);

struct LoadedSource {
  ParsedScene scene;
  AnnotationSet annotation;
};

LoadedSource load_source(const DatasetSource& source, const AnnotationOptions& options = {});

struct GenerateRequest {
  std::vector<DatasetSource> sources;
  PipelineConfig config;
  std::uint64_t seed = 0;
  fs::path out;
  int jobs = 1;
  bool camera_aware = true;
};

// Generates R*N*P demos into `out`, optionally camera-processed with one
// dataset-wide shrink rectangle. Throws on I/O and configuration errors.
DatasetInfo run_generate(const GenerateRequest& request);

// Two-pass camera-aware processing of a raw generated dataset.
DatasetInfo process_dataset(const fs::path& in, const fs::path& out, const ProcessorConfig& cfg,
                            bool bypass_nonrigid, int jobs);

}  // namespace pcdgen
