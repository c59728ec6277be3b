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

#include "pcdgen/motion_planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pcdgen {

namespace {

struct Path {
  std::array<Eigen::Vector3d, 4> corners;
  std::array<double, 3> lengths{};
  double total = 0;

  Eigen::Vector3d at(double s) const {
    for (int i = 0; i < 3; ++i) {
      if (s <= lengths[static_cast<std::size_t>(i)] || i == 2) {
        const double len = lengths[static_cast<std::size_t>(i)];
        const double f = len > 0 ? std::clamp(s / len, 0.0, 1.0) : 1.0;
        return corners[static_cast<std::size_t>(i)] +
               f * (corners[static_cast<std::size_t>(i) + 1] - corners[static_cast<std::size_t>(i)]);
      }
      s -= lengths[static_cast<std::size_t>(i)];
    }
    return corners[3];
  }
};

Path make_path(const Pose& start, const Pose& goal, const MotionOptions& o) {
  Path p;
  const Eigen::Vector3d up = o.up.normalized();
  p.corners = {start.translation(), start.translation() + o.lift * up, goal.translation() + o.lift * up,
               goal.translation()};
  for (std::size_t i = 0; i < 3; ++i) {
    p.lengths[i] = (p.corners[i + 1] - p.corners[i]).norm();
    p.total += p.lengths[i];
  }
  return p;
}

double rotation_angle(const Pose& a, const Pose& b) {
  return Eigen::AngleAxisd(a.linear().transpose() * b.linear()).angle();
}

}  // namespace

int waypoint_count(const Pose& start, const Pose& goal, const MotionOptions& o) {
  if (start.matrix() == goal.matrix()) return 2;
  const Path path = make_path(start, goal, o);
  const double by_distance = std::ceil(path.total / o.step);
  const double by_angle = std::ceil(rotation_angle(start, goal) / o.angle_step);
  return std::max(2, static_cast<int>(std::max(by_distance, by_angle)) + 1);
}

std::vector<Pose> interpolate_motion(const Pose& start, const Pose& goal, int count,
                                     const MotionOptions& o) {
  count = std::max(count, 2);
  std::vector<Pose> out(static_cast<std::size_t>(count));
  out.front() = start;
  out.back() = goal;
  const Path path = make_path(start, goal, o);
  const Eigen::Quaterniond q0(start.linear());
  const Eigen::Quaterniond q1(goal.linear());
  for (int j = 1; j + 1 < count; ++j) {
    const double f = static_cast<double>(j) / (count - 1);
    const Eigen::Quaterniond q = q0.slerp(f, q1);
    out[static_cast<std::size_t>(j)] = make_pose(q.normalized().toRotationMatrix(), path.at(f * path.total));
  }
  return out;
}

std::vector<int> resample_indices(int source_len, int count) {
  std::vector<int> out(static_cast<std::size_t>(std::max(count, 0)));
  if (source_len <= 0) return out;
  for (int j = 0; j < count; ++j) {
    const double f = count > 1 ? static_cast<double>(j) / (count - 1) : 0.0;
    out[static_cast<std::size_t>(j)] = static_cast<int>(std::lround(f * (source_len - 1)));
  }
  return out;
}

PlannedMotion plan_motion(const Pose& start, const Pose& goal, std::span<const float> source_grips,
                          const MotionOptions& options) {
  PlannedMotion m;
  const int count = waypoint_count(start, goal, options);
  m.poses = interpolate_motion(start, goal, count, options);
  for (int idx : resample_indices(static_cast<int>(source_grips.size()), count))
    if (!source_grips.empty()) m.grips.push_back(source_grips[static_cast<std::size_t>(idx)]);
  return m;
}

}  // namespace pcdgen
