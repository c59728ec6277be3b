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

#include "pcdgen/types.hpp"

#include <cmath>

#include "pcdgen/errors.hpp"

namespace pcdgen {

void CameraModel::validate() const {
  if (!(fx > 0 && fy > 0)) throw InvariantViolation("camera focal length must be positive");
  if (width <= 0 || height <= 0) throw InvariantViolation("camera image size must be positive");
  if (!(cx > 0 && cx < width && cy > 0 && cy < height))
    throw InvariantViolation("camera principal point outside the image");
  if (!(depth_min >= 0 && depth_min < depth_max))
    throw InvariantViolation("camera depth range must satisfy 0 <= min < max");
}

void PointCloud::validate() const {
  if (!points.allFinite()) throw InvariantViolation("point cloud has non-finite coordinates");
  if (colors.rows() != 0 && colors.rows() != points.rows())
    throw InvariantViolation("color channel length differs from point count");
  if (labels.rows() != 0 && labels.rows() != points.rows())
    throw InvariantViolation("label channel length differs from point count");
}

PointCloud PointCloud::with_label(std::uint16_t label) const {
  PointCloud out = *this;
  out.labels = Labels::Constant(size(), label);
  return out;
}

bool PointCloud::operator==(const PointCloud& other) const {
  return points == other.points && colors == other.colors && labels == other.labels;
}

void Demonstration::validate() const {
  camera.validate();
  if (arm_count != 1 && arm_count != 2)
    throw InvariantViolation("arm count must be 1 or 2");
  if (frames.size() < 2) throw InvariantViolation("demonstration needs at least two frames");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const int frame = static_cast<int>(t) + 1;
    const Frame& f = frames[t];
    if (f.observation.empty()) throw InvariantViolation("empty observation", frame);
    try {
      f.observation.validate();
    } catch (const InvariantViolation& e) {
      throw InvariantViolation(e.what(), frame);
    }
    if (static_cast<int>(f.action.ee.size()) != arm_count ||
        static_cast<int>(f.action.grip.size()) != arm_count)
      throw InvariantViolation("action arm count differs from demonstration", frame);
    for (const Pose& p : f.action.ee)
      if (!is_valid_pose(p.matrix())) throw InvariantViolation("end-effector pose is not rigid", frame);
  }
}

int ParsedScene::index_of(int id) const {
  for (std::size_t k = 0; k < templates.size(); ++k)
    if (templates[k].id == id) return static_cast<int>(k);
  return -1;
}

PointCloud ParsedScene::object_cloud(int t, int k) const {
  const ObjectTemplate& tpl = templates[k];
  if (!tpl.rigid) return nonrigid_clouds[t][k].with_label(static_cast<std::uint16_t>(tpl.id));
  return transform_cloud(tpl.cloud, object_poses[t][k])
      .with_label(static_cast<std::uint16_t>(tpl.id));
}

bool is_valid_pose(const Eigen::Matrix4d& m, double tol) {
  if (!m.allFinite()) return false;
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) return false;
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  if ((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

Pose make_pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) {
  Pose p = Pose::Identity();
  p.linear() = rotation;
  p.translation() = translation;
  return p;
}

float quantize_grip(double width) {
  return static_cast<float>(std::round(width * 1000.0) / 1000.0);
}

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  PointCloud out;
  out.points = transform_points<float>(cloud.points, pose);
  out.colors = cloud.colors;
  out.labels = cloud.labels;
  return out;
}

PointCloud select(const PointCloud& cloud, std::span<const Eigen::Index> indices) {
  const auto n = static_cast<Eigen::Index>(indices.size());
  PointCloud out;
  out.points.resize(n, 3);
  if (cloud.has_colors()) out.colors.resize(n, 3);
  if (cloud.has_labels()) out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = indices[static_cast<std::size_t>(i)];
    out.points.row(i) = cloud.points.row(src);
    if (cloud.has_colors()) out.colors.row(i) = cloud.colors.row(src);
    if (cloud.has_labels()) out.labels(i) = cloud.labels(src);
  }
  return out;
}

PointCloud concat(std::span<const PointCloud> clouds) {
  Eigen::Index total = 0;
  bool colors = true, labels = true;
  for (const PointCloud& c : clouds) {
    total += c.size();
    if (!c.empty()) {
      colors = colors && c.has_colors();
      labels = labels && c.has_labels();
    }
  }
  PointCloud out;
  out.points.resize(total, 3);
  if (total == 0) return out;
  if (colors) out.colors.resize(total, 3);
  if (labels) out.labels.resize(total);
  Eigen::Index at = 0;
  for (const PointCloud& c : clouds) {
    if (c.empty()) continue;
    out.points.middleRows(at, c.size()) = c.points;
    if (colors) out.colors.middleRows(at, c.size()) = c.colors;
    if (labels) out.labels.segment(at, c.size()) = c.labels;
    at += c.size();
  }
  return out;
}

}  // namespace pcdgen
