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

#include <optional>
#include <span>
#include <vector>

#include "pcdgen/types.hpp"

namespace pcdgen {

// Outputs of the upstream tracker and segmenter, plus the pre-task capture o_0.
struct TrackingInput {
  std::vector<ObjectTemplate> templates;
  // poses[t][k] places templates[k] at frame t; std::nullopt marks a lost
  // track. Ignored for non-rigid templates.
  std::vector<std::vector<std::optional<Pose>>> poses;
  // nonrigid[t][k] is the tracked cloud of non-rigid templates[k].
  std::vector<std::vector<PointCloud>> nonrigid;
  PointCloud environment;
};

inline constexpr double kDefaultSetDifferenceEps = 0.005;

// Template placed at `pose`, every point labelled with the template id.
// Throws NonRigidTemplate for non-rigid templates.
PointCloud complete_object(const ObjectTemplate& tpl, const Pose& pose);

// Points of `raw` farther than eps from every point of env and objects, in
// their original order.
PointCloud extract_arm(const PointCloud& raw, const PointCloud& env,
                       std::span<const PointCloud> objects, double eps);

// Splits the demo into environment, completed objects and arm. Arm points
// are labelled per arm by proximity to the end effectors. Frames are
// processed on up to `jobs` threads.
ParsedScene parse_scene(const Demonstration& demo, const TrackingInput& tracking,
                        double eps = kDefaultSetDifferenceEps, int jobs = 1);

}  // namespace pcdgen
