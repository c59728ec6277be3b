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

#include "pcdgen/types.hpp"

namespace pcdgen {

// normal · x + offset = 0, with the normal facing the camera (offset >= 0).
struct Plane {
  Eigen::Vector3d normal = -Eigen::Vector3d::UnitZ();
  double offset = 0;

  double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) + offset; }
};

struct PlaneFitOptions {
  double inlier_threshold = 0.005;
  double min_inlier_fraction = 0.3;
  int iterations = 500;
  int max_scoring_points = 20000;
  std::uint64_t seed = 0x7ab1e5eedull;
};

// Dominant plane by consensus sampling followed by a least-squares refit on
// the inliers. Throws DegenerateGeometry.
Plane fit_table_plane(const PointCloud& env, const PlaneFitOptions& options = {});

// Least-squares plane through all given points (centroid + smallest
// principal direction), oriented like fit_table_plane.
Plane least_squares_plane(std::span<const Eigen::Vector3d> points);

// Orthonormal frame on the table plane: z along the plane normal, x along
// the camera x axis projected into the plane.
class TableFrame {
 public:
  TableFrame() = default;
  TableFrame(const Plane& plane, const Eigen::Vector3d& anchor);

  const Plane& plane() const { return plane_; }
  const Pose& table_to_camera() const { return table_to_camera_; }

  // In-plane coordinates of the projection of p.
  Eigen::Vector2d to_table(const Eigen::Vector3d& p) const;

  // Camera-frame transform rotating by `angle` about the plane normal through
  // `pivot` and then translating by `shift` (both in table coordinates).
  Pose in_plane_transform(const Eigen::Vector2d& pivot, double angle,
                          const Eigen::Vector2d& shift) const;

 private:
  Plane plane_;
  Pose table_to_camera_ = Pose::Identity();
};

// 2-d helpers used for object footprints on the table.
using Polygon = std::vector<Eigen::Vector2d>;

// Counter-clockwise convex hull (monotone chain).
Polygon convex_hull(std::vector<Eigen::Vector2d> points);

// Minimum distance between two convex polygons, 0 when they overlap.
double polygon_distance(const Polygon& a, const Polygon& b);

bool point_in_convex(const Polygon& poly, const Eigen::Vector2d& p);

}  // namespace pcdgen
