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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pcdgen/annotation.hpp"
#include "pcdgen/motion_planner.hpp"
#include "pcdgen/table_plane.hpp"
#include "pcdgen/types.hpp"

namespace pcdgen {

// Axis-aligned rectangle in table coordinates (meters). The table origin is
// where the optical axis meets the table plane.
struct Workspace {
  Eigen::Vector2d lo{-0.25, -0.25};
  Eigen::Vector2d hi{0.25, 0.25};

  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
};

enum class SamplingMode {
  kContinuous,  // group pivot uniform over the workspace
  kGrid,        // group pivot drawn from `locations`
  kIdentity,    // every transform is the identity (debugging, replay)
};

struct SamplerConfig {
  Workspace workspace;
  double rotation_min = -0.5235987755982988;  // radians
  double rotation_max = 0.5235987755982988;
  SamplingMode mode = SamplingMode::kContinuous;
  std::vector<Eigen::Vector2d> locations;
  double clearance = 0.02;
  int max_attempts = 1000;

  // Groups containing a non-rigid object only move a little around their
  // source placement: their partial clouds do not survive large view changes.
  double nonrigid_translation = 0.03;
  double nonrigid_rotation = 0.0872664625997165;  // 5 degrees

  double perturb_radius = 0.015;
  double perturb_rotation = 0.3490658503988659;  // 20 degrees
  int perturbations = 3;
  int replays = 3;
  int combinations = 16;

  double env_translation = 0.05;
  double env_rotation = 0.17453292519943295;  // 10 degrees

  MotionOptions motion;

  void validate() const;
};

struct PlanarMove {
  Eigen::Vector2d pivot = Eigen::Vector2d::Zero();
  double angle = 0;
  Eigen::Vector2d shift = Eigen::Vector2d::Zero();
};

struct GroupTransformPlan {
  std::vector<Pose> skill_transforms;  // sampled T_i, identity when the group is fixed
  std::vector<PlanarMove> moves;       // in-plane parameters of skill_transforms
  std::vector<bool> sampled;
  // Transform actually applied to skill i's group and trajectory: the sampled
  // one, or for a fixed group the placement its objects already received
  // from the later skill that froze them.
  std::vector<Pose> effective;
  Pose environment = Pose::Identity();
  PlanarMove environment_move;
  Plane plane;
  Pose table_to_camera = Pose::Identity();
  std::uint64_t seed = 0;
};

nlohmann::json plan_to_json(const GroupTransformPlan& plan);
GroupTransformPlan plan_from_json(const nlohmann::json& j);

IdSet update_fixed_set(const IdSet& fixed, const IdSet& target, const IdSet& hand);

// Which skills get a freshly sampled transform, by backtracking over the
// fixed set from the last skill to the first.
std::vector<bool> sampled_skills(const AnnotationSet& ann);

// Effective per-skill transforms given the sampled ones. Throws PlanConflict
// when a fixed group holds objects that received different placements.
std::vector<Pose> propagate_transforms(const AnnotationSet& ann, const std::vector<Pose>& transforms,
                                       const std::vector<bool>& sampled);

// Left-multiplies every end-effector pose by `t` (world-frame transform);
// gripper states are copied.
std::vector<Action> augment_skill(std::span<const Action> actions, const Pose& t);

// Per-source data shared by every plan drawn from it.
class AugmentContext {
 public:
  AugmentContext(const ParsedScene& scene, const AnnotationSet& ann, const PlaneFitOptions& fit = {});

  const ParsedScene& scene() const { return *scene_; }
  const AnnotationSet& annotation() const { return *ann_; }
  const std::vector<Segment>& skills() const { return skills_; }
  const TableFrame& table() const { return table_; }
  // Table-plane footprint of template k at the start frame of skill i.
  const Polygon& footprint(int skill, int k) const { return footprints_[skill][k]; }
  bool group_is_rigid(int skill) const;

 private:
  const ParsedScene* scene_;
  const AnnotationSet* ann_;
  std::vector<Segment> skills_;
  TableFrame table_;
  std::vector<std::vector<Polygon>> footprints_;
};

// Throws SamplingExhausted.
GroupTransformPlan plan_augmentation(const AugmentContext& ctx, const SamplerConfig& cfg, std::uint64_t seed);

// Composes a small in-plane jitter onto each sampled transform of `base`.
GroupTransformPlan perturb_plan(const AugmentContext& ctx, const GroupTransformPlan& base,
                                const SamplerConfig& cfg, std::uint64_t seed);

struct Trajectory {
  std::vector<Action> actions;
  std::vector<int> source_frames;  // 1-based source frame of every generated frame
  AnnotationSet annotation;        // segment boundaries in generated frames
};

Trajectory augment_trajectory(const AugmentContext& ctx, const GroupTransformPlan& plan,
                              const MotionOptions& motion);

struct AugmentedFrames {
  std::vector<PointCloud> observations;
  std::vector<std::vector<Pose>> object_poses;  // [frame][template]
};

AugmentedFrames augment_observations(const AugmentContext& ctx, const GroupTransformPlan& plan,
                                     const Trajectory& traj);

// Throws ConstraintViolation at the first (1-based) frame whose inter-arm
// relative pose drifts from the one at the start of a shared-object motion.
void check_bimanual_constraint(const AnnotationSet& ann, std::span<const Action> actions,
                               double tolerance = 1e-9);

struct GeneratedDemo {
  Demonstration demo;
  AnnotationSet annotation;
  std::vector<int> source_frames;
  std::vector<std::vector<Pose>> object_poses;
  GroupTransformPlan plan;
  std::size_t index = 0;  // (replay * N + combination) * P + perturbation
  int replay = 0, combination = 0, perturbation = 0, source = 0;
};

GeneratedDemo materialize(const AugmentContext& ctx, const GroupTransformPlan& plan, const SamplerConfig& cfg);

struct PlannedTuple {
  std::size_t index = 0;
  int replay = 0, combination = 0, perturbation = 0, source = 0;
  GroupTransformPlan plan;
};

struct BatchPlan {
  std::size_t requested = 0;
  std::vector<PlannedTuple> tuples;  // ordered by index; exhausted tuples are absent
  std::vector<std::string> warnings;
};

// Replay r draws from sources[r % sources.size()].
BatchPlan plan_batch(std::span<const AugmentContext* const> sources, const SamplerConfig& cfg,
                     std::uint64_t seed, int jobs);

GeneratedDemo materialize(std::span<const AugmentContext* const> sources, const PlannedTuple& tuple,
                          const SamplerConfig& cfg);

struct GenerateSummary {
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::vector<std::string> warnings;
};

// Materialises every planned tuple; `sink` may be called concurrently.
GenerateSummary generate(std::span<const AugmentContext* const> sources, const SamplerConfig& cfg,
                         std::uint64_t seed, int jobs, const std::function<void(GeneratedDemo&&)>& sink);

std::vector<GeneratedDemo> generate(std::span<const AugmentContext* const> sources, const SamplerConfig& cfg,
                                    std::uint64_t seed, int jobs = 1, GenerateSummary* summary = nullptr);

}  // namespace pcdgen
