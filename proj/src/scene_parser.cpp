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

#include "pcdgen/scene_parser.hpp"

#include "pcdgen/errors.hpp"
#include "pcdgen/kdtree.hpp"
#include "pcdgen/parallel.hpp"

namespace pcdgen {

namespace {

PointCloud subtract(const PointCloud& raw, std::span<const KdTree* const> refs, double eps) {
  const double eps_sq = eps * eps;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const Eigen::Vector3d q = raw.points.row(i).transpose().cast<double>();
    bool covered = false;
    for (const KdTree* tree : refs) {
      if (tree->any_within(q, eps_sq)) {
        covered = true;
        break;
      }
    }
    if (!covered) keep.push_back(i);
  }
  return select(raw, keep);
}

}  // namespace

PointCloud complete_object(const ObjectTemplate& tpl, const Pose& pose) {
  if (!tpl.rigid)
    throw NonRigidTemplate("object " + std::to_string(tpl.id) + " is not rigid");
  return transform_cloud(tpl.cloud, pose).with_label(static_cast<std::uint16_t>(tpl.id));
}

PointCloud extract_arm(const PointCloud& raw, const PointCloud& env,
                       std::span<const PointCloud> objects, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("extract_arm: eps must be positive");
  const KdTree env_tree(env.points);
  const KdTree obj_tree(concat(objects).points);
  const KdTree* refs[] = {&env_tree, &obj_tree};
  return subtract(raw, refs, eps);
}

ParsedScene parse_scene(const Demonstration& demo, const TrackingInput& tracking, double eps,
                        int jobs) {
  if (!(eps > 0)) throw std::invalid_argument("parse_scene: eps must be positive");
  const int horizon = demo.horizon();
  if (static_cast<int>(tracking.poses.size()) < horizon ||
      static_cast<int>(tracking.nonrigid.size()) < horizon)
    throw MissingPose(static_cast<int>(std::min(tracking.poses.size(), tracking.nonrigid.size())) + 1,
                      tracking.templates.empty() ? 0 : tracking.templates.front().id);

  ParsedScene scene;
  scene.demo = demo;
  scene.environment = tracking.environment.with_label(kEnvironmentLabel);
  scene.templates = tracking.templates;
  const std::size_t k_count = tracking.templates.size();
  scene.object_poses.assign(static_cast<std::size_t>(horizon), std::vector<Pose>(k_count, Pose::Identity()));
  scene.nonrigid_clouds.assign(static_cast<std::size_t>(horizon), std::vector<PointCloud>(k_count));

  for (int t = 0; t < horizon; ++t) {
    for (std::size_t k = 0; k < k_count; ++k) {
      const ObjectTemplate& tpl = tracking.templates[k];
      if (tpl.rigid) {
        const auto& pose = tracking.poses[static_cast<std::size_t>(t)][k];
        if (!pose) throw MissingPose(t + 1, tpl.id);
        scene.object_poses[static_cast<std::size_t>(t)][k] = *pose;
      } else {
        scene.nonrigid_clouds[static_cast<std::size_t>(t)][k] =
            tracking.nonrigid[static_cast<std::size_t>(t)][k].with_label(static_cast<std::uint16_t>(tpl.id));
      }
    }
  }

  const KdTree env_tree(scene.environment.points);
  scene.arm.resize(static_cast<std::size_t>(horizon));
  parallel_for(horizon, jobs, [&](int t) {
    std::vector<PointCloud> objects;
    for (std::size_t k = 0; k < k_count; ++k) objects.push_back(scene.object_cloud(t, static_cast<int>(k)));
    const KdTree obj_tree(concat(objects).points);
    const KdTree* refs[] = {&env_tree, &obj_tree};
    PointCloud arm = subtract(demo.frames[static_cast<std::size_t>(t)].observation, refs, eps);
    arm.labels.resize(arm.size());
    const Action& action = demo.frames[static_cast<std::size_t>(t)].action;
    for (Eigen::Index i = 0; i < arm.size(); ++i) {
      int best = 0;
      if (demo.arm_count > 1) {
        const Eigen::Vector3d p = arm.points.row(i).transpose().cast<double>();
        double best_d = (action.ee[0].translation() - p).squaredNorm();
        for (int a = 1; a < demo.arm_count; ++a) {
          const double d = (action.ee[static_cast<std::size_t>(a)].translation() - p).squaredNorm();
          if (d < best_d) best_d = d, best = a;
        }
      }
      arm.labels(i) = arm_label(best);
    }
    scene.arm[static_cast<std::size_t>(t)] = std::move(arm);
  });
  return scene;
}

}  // namespace pcdgen
