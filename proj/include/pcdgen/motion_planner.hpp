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

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pcdgen/types.hpp"

namespace pcdgen {

struct MotionOptions {
  double step = 0.01;         // max position change between waypoints (m)
  double angle_step = 0.05;   // max rotation change between waypoints (rad)
  double lift = 0.05;         // vertical clearance of the transit phase (m)
  Eigen::Vector3d up = -Eigen::Vector3d::UnitZ();  // table normal
};

struct PlannedMotion {
  std::vector<Pose> poses;
  std::vector<float> grips;
};

// Number of waypoints (>= 2, endpoints included) that keeps both position
// and rotation increments within the configured steps.
int waypoint_count(const Pose& start, const Pose& goal, const MotionOptions& options);

// Lift–transit–descend path sampled at `count` waypoints equally spaced in
// arc length, orientation slerped at constant rate. The first and last
// waypoints are `start` and `goal` exactly.
std::vector<Pose> interpolate_motion(const Pose& start, const Pose& goal, int count,
                                     const MotionOptions& options);

// Nearest normalised-time index map from `count` samples into a sequence of
// `source_len` entries. Monotone, first -> 0, last -> source_len - 1.
std::vector<int> resample_indices(int source_len, int count);

PlannedMotion plan_motion(const Pose& start, const Pose& goal, std::span<const float> source_grips,
                          const MotionOptions& options);

}  // namespace pcdgen
