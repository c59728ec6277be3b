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
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pcdgen {

// Point coordinates are float32, camera frame: +Z optical axis, +X right,
// +Y down. Poses are float64 rigid transforms acting on column vectors.
using Points = Eigen::Matrix<float, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Colors = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Labels = Eigen::Matrix<std::uint16_t, Eigen::Dynamic, 1>;
using Pose = Eigen::Isometry3d;

// Label conventions shared by all modules.
inline constexpr std::uint16_t kEnvironmentLabel = 0;
inline constexpr std::uint16_t kArmLabelBase = 65000;
inline constexpr std::uint16_t arm_label(int arm) {
  return static_cast<std::uint16_t>(kArmLabelBase + arm);
}
inline constexpr bool is_arm_label(std::uint16_t label) {
  return label >= kArmLabelBase;
}

struct CameraModel {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  double depth_min = 0, depth_max = 0;

  // Throws InvariantViolation.
  void validate() const;
  bool operator==(const CameraModel&) const = default;
};

// Colors and labels are optional: a channel is present when it has one row
// per point.
struct PointCloud {
  Points points;
  Colors colors;
  Labels labels;

  PointCloud() = default;
  explicit PointCloud(Points p) : points(std::move(p)) {}

  Eigen::Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
  bool has_colors() const { return colors.rows() > 0 && colors.rows() == size(); }
  bool has_labels() const { return labels.rows() > 0 && labels.rows() == size(); }

  void validate() const;

  // Same point set with every label replaced by `label`.
  PointCloud with_label(std::uint16_t label) const;

  bool operator==(const PointCloud& other) const;
};

struct Action {
  std::vector<Pose> ee;     // one per arm, left then right
  std::vector<float> grip;  // gripper width in meters, one per arm
};

struct Frame {
  PointCloud observation;
  Action action;
};

struct Demonstration {
  CameraModel camera;
  int arm_count = 1;
  std::vector<Frame> frames;

  int horizon() const { return static_cast<int>(frames.size()); }
  void validate() const;
};

struct ObjectTemplate {
  int id = 0;
  PointCloud cloud;
  bool rigid = true;
};

struct ParsedScene {
  Demonstration demo;
  PointCloud environment;
  std::vector<ObjectTemplate> templates;
  // object_poses[t][k] is the placement of templates[k] at frame t; unused
  // for non-rigid objects.
  std::vector<std::vector<Pose>> object_poses;
  // nonrigid_clouds[t][k] holds the tracked cloud of non-rigid templates[k].
  std::vector<std::vector<PointCloud>> nonrigid_clouds;
  std::vector<PointCloud> arm;

  int object_count() const { return static_cast<int>(templates.size()); }
  // Index into templates for an object id, -1 when absent.
  int index_of(int id) const;
  // Object cloud at frame t (0-based), in camera coordinates, labelled.
  PointCloud object_cloud(int t, int k) const;
};

// Rigidity check used by loaders: |R R^T - I|_inf <= tol, det(R) = +1 and
// last row (0,0,0,1).
bool is_valid_pose(const Eigen::Matrix4d& m, double tol = 1e-6);

Pose make_pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

// Gripper widths are quantised to 1 mm.
float quantize_grip(double width);

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose);

// Rows of `cloud` selected by `indices`, in order.
PointCloud select(const PointCloud& cloud, std::span<const Eigen::Index> indices);

// Concatenation; a channel survives only if every non-empty input has it.
PointCloud concat(std::span<const PointCloud> clouds);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor> transform_points(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>& pts,
    const Pose& pose) {
  const Eigen::Matrix<double, 3, 3> r = pose.linear();
  const Eigen::Matrix<double, 1, 3> t = pose.translation().transpose();
  return ((pts.template cast<double>() * r.transpose()).rowwise() + t)
      .template cast<Scalar>();
}

}  // namespace pcdgen
