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
#include <optional>

#include <nlohmann/json.hpp>

#include "pcdgen/scene_parser.hpp"
#include "pcdgen/types.hpp"

namespace pcdgen {

namespace fs = std::filesystem;

inline constexpr const char* kFormatVersion = "1";

// pcd-bin: little-endian u32 count, xyz float32 triples, then optional rgb
// u8 triples, then optional u16 labels. Optional channels are recognised by
// the remaining byte count.
PointCloud read_cloud(const fs::path& path);
void write_cloud(const PointCloud& cloud, const fs::path& path);

// Per-frame 4x4 float64 row-major matrices.
std::vector<Eigen::Matrix4d> read_matrices(const fs::path& path);
void write_matrices(std::span<const Eigen::Matrix4d> mats, const fs::path& path);

nlohmann::json camera_to_json(const CameraModel& cam);
CameraModel camera_from_json(const nlohmann::json& j);

struct ContainerMeta {
  CameraModel camera;
  int arm_count = 1;
  int horizon = 0;
  std::optional<CameraModel> effective_camera;
};

// Demonstration container: meta.json, frames/%06d.pcd-bin (1-based),
// actions.bin. Throws MalformedContainer or InvariantViolation on load,
// IoFailure on save.
Demonstration load_demonstration(const fs::path& dir,
                                 std::optional<CameraModel>* effective_camera = nullptr);
void save_demonstration(const Demonstration& demo, const fs::path& dir,
                        const std::optional<CameraModel>& effective_camera = std::nullopt);

// Parsed scene: a demonstration container plus environment.pcd-bin,
// templates/obj_%d.pcd-bin, poses/obj_%d.bin, arm/%06d.pcd-bin and
// nonrigid/obj_%d/%06d.pcd-bin, with object flags under "objects" in meta.json.
ParsedScene load_parsed_scene(const fs::path& dir);
void save_parsed_scene(const ParsedScene& scene, const fs::path& dir);

// Tracking directory: objects.json, templates/, poses/, nonrigid/,
// environment.pcd-bin. A lost track is stored as a NaN matrix.
TrackingInput load_tracking(const fs::path& dir, int horizon);
void save_tracking(const TrackingInput& tracking, const fs::path& dir);

// Writes a small JSON document, creating parent directories.
void write_json(const nlohmann::json& j, const fs::path& path);
nlohmann::json read_json(const fs::path& path);

}  // namespace pcdgen
