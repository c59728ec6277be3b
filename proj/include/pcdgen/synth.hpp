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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pcdgen/annotation.hpp"
#include "pcdgen/scene_parser.hpp"
#include "pcdgen/types.hpp"

namespace pcdgen {

enum class Shape { kBox, kCylinder };

// Primitive in its own frame: origin at the centre of the bottom face, z up.
// Boxes use size = (sx, sy, sz); cylinders (radius, radius, height).
struct Primitive {
  int id = 0;
  Shape shape = Shape::kBox;
  Eigen::Vector3d size = Eigen::Vector3d::Constant(0.05);
  bool rigid = true;

  double height() const { return size.z(); }
};

struct ScriptStep {
  std::string op;  // pick | place | bi_pick | bi_place
  int object = 0;
  int arm = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // place: world xy of the object
  std::optional<double> yaw;                           // place: radians, default keep
  int on = 0;                                          // place on top of this object
  std::vector<int> targets;                            // extra target ids
};

// Procedural tabletop scene. World frame: table plane z = 0, origin where
// the optical axis meets the table, x along the image rows.
struct SceneSpec {
  CameraModel camera{150, 150, 80, 60, 160, 120, 0.1, 3.0};
  double camera_height = 0.8;
  double camera_pitch = 1.3089969389957472;  // optical axis below horizontal (75 deg)
  Eigen::Vector2d table_half_extent{1.5, 1.5};
  double density = 2.0;            // samples per pixel along each image axis
  double template_spacing = 0.004;
  int arms = 1;
  std::vector<Eigen::Vector3d> home;  // world EE start positions
  double approach_height = 0.08;
  int motion_frames = 5;
  int skill_frames = 4;
  double open_width = 0.08;
  double closed_width = 0.02;
  std::vector<Primitive> objects;
  std::vector<Eigen::Vector3d> placements;  // (x, y, yaw) per object
  std::vector<ScriptStep> script;

  Pose camera_from_world() const;
};

// Throws SpecError.
SceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::json scene_spec_to_json(const SceneSpec& spec);

// A scene at one configuration, everything in camera coordinates.
struct SceneConfiguration {
  Pose environment = Pose::Identity();  // table frame -> camera
  Eigen::Vector2d table_half_extent{1.5, 1.5};
  bool with_table = true;
  std::vector<std::pair<Primitive, Pose>> objects;
  std::vector<Pose> arms;  // end-effector poses
  double density = 2.0;
  std::uint64_t seed = 0;
};

inline constexpr double kArmRadius = 0.02;
inline constexpr double kArmLength = 0.4;

struct Rendering {
  PointCloud cloud;          // one point per covered pixel, labelled
  std::vector<float> depth;  // row-major, 0 = empty
};

Rendering render(const SceneConfiguration& config, const CameraModel& cam);
PointCloud render_reference(const SceneConfiguration& config, const CameraModel& cam);

// Object-frame surface samples on a regular grid (the "scanned" template).
PointCloud sample_primitive(const Primitive& p, double spacing);

struct SynthScene {
  Demonstration demo;
  TrackingInput tracking;
  AnnotationSet annotation;
  std::vector<std::vector<float>> depth;  // ground-truth depth per frame
  std::vector<std::vector<Pose>> object_poses;  // camera frame, [frame][object]
};

SynthScene make_scene(const SceneSpec& spec, std::uint64_t seed);

// Built-in scenes used by the tests and as CLI starting points.
SceneSpec example_pick_place_spec();  // 1 arm, 3 objects, 2 skills
SceneSpec example_bridge_spec();      // 1 arm, 3 objects, 4 skills
SceneSpec example_bimanual_spec();    // 2 arms, 2 objects, shared carry

}  // namespace pcdgen
