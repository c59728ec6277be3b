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

#include "pcdgen/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>

#include "pcdgen/errors.hpp"
#include "pcdgen/parallel.hpp"
#include "pcdgen/seed.hpp"

namespace pcdgen {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kCombinationSalt = 0xc0b1a7e5c0b1a7e5ull;

json pose_to_json(const Pose& p) {
  json a = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a.push_back(p.matrix()(r, c));
  return a;
}

Pose pose_from_json(const json& a) {
  if (!a.is_array() || a.size() != 16) throw SchemaError("pose must be 16 numbers");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = a.at(static_cast<std::size_t>(r * 4 + c)).get<double>();
  Pose p;
  p.matrix() = m;
  return p;
}

json move_to_json(const PlanarMove& m) {
  return {{"pivot", {m.pivot.x(), m.pivot.y()}}, {"angle", m.angle}, {"shift", {m.shift.x(), m.shift.y()}}};
}

PlanarMove move_from_json(const json& j) {
  PlanarMove m;
  m.pivot = {j.at("pivot").at(0).get<double>(), j.at("pivot").at(1).get<double>()};
  m.angle = j.at("angle").get<double>();
  m.shift = {j.at("shift").at(0).get<double>(), j.at("shift").at(1).get<double>()};
  return m;
}

// 2-d rigid motion p -> R p + t.
struct Planar {
  Eigen::Matrix2d r = Eigen::Matrix2d::Identity();
  Eigen::Vector2d t = Eigen::Vector2d::Zero();

  static Planar of(const PlanarMove& m) {
    Planar p;
    p.r = Eigen::Rotation2Dd(m.angle).toRotationMatrix();
    p.t = m.pivot + m.shift - p.r * m.pivot;
    return p;
  }
  static Planar of(const Pose& camera_pose, const TableFrame& table) {
    const Pose local = table.table_to_camera().inverse() * camera_pose * table.table_to_camera();
    Planar p;
    p.r = local.linear().topLeftCorner<2, 2>();
    p.t = local.translation().head<2>();
    return p;
  }
  Polygon apply(const Polygon& poly) const {
    Polygon out;
    out.reserve(poly.size());
    for (const auto& v : poly) out.push_back(r * v + t);
    return out;
  }
};

bool intersects(const IdSet& a, const IdSet& b) {
  return std::any_of(a.begin(), a.end(), [&](int id) { return b.count(id) > 0; });
}

Pose apply_move(const TableFrame& table, const PlanarMove& m) {
  return table.in_plane_transform(m.pivot, m.angle, m.shift);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::Vector2d uniform_disc(std::mt19937_64& rng, double radius) {
  if (!(radius > 0)) return Eigen::Vector2d::Zero();
  const double rr = radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double a = uniform(rng, -M_PI, M_PI);
  return {rr * std::cos(a), rr * std::sin(a)};
}

using Proposer = std::function<PlanarMove(int skill, std::mt19937_64& rng)>;

}  // namespace

void SamplerConfig::validate() const {
  if (!(workspace.lo.x() <= workspace.hi.x() && workspace.lo.y() <= workspace.hi.y()))
    throw ConfigError("workspace bounds are inverted");
  if (!(rotation_min <= rotation_max)) throw ConfigError("rotation range is inverted");
  if (mode == SamplingMode::kGrid && locations.empty()) throw ConfigError("grid sampling needs locations");
  if (!(clearance >= 0)) throw ConfigError("clearance must be >= 0");
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (!(perturb_radius >= 0) || !(perturb_rotation >= 0)) throw ConfigError("perturbation bounds must be >= 0");
  if (perturbations < 1 || replays < 1 || combinations < 1)
    throw ConfigError("replays, combinations and perturbations must be >= 1");
  if (!(env_translation >= 0) || !(env_rotation >= 0)) throw ConfigError("environment bounds must be >= 0");
  if (!(nonrigid_translation >= 0) || !(nonrigid_rotation >= 0))
    throw ConfigError("non-rigid bounds must be >= 0");
  if (!(motion.step > 0) || !(motion.angle_step > 0) || !(motion.lift >= 0))
    throw ConfigError("motion step sizes must be positive and lift >= 0");
}

json plan_to_json(const GroupTransformPlan& plan) {
  json skills = json::array();
  for (std::size_t i = 0; i < plan.skill_transforms.size(); ++i) {
    skills.push_back({{"sampled", static_cast<bool>(plan.sampled[i])},
                      {"transform", pose_to_json(plan.skill_transforms[i])},
                      {"move", move_to_json(plan.moves[i])},
                      {"effective", pose_to_json(plan.effective[i])}});
  }
  return {{"seed", plan.seed},
          {"plane", {{"normal", {plan.plane.normal.x(), plan.plane.normal.y(), plan.plane.normal.z()}},
                     {"offset", plan.plane.offset}}},
          {"table_to_camera", pose_to_json(plan.table_to_camera)},
          {"environment", {{"transform", pose_to_json(plan.environment)},
                           {"move", move_to_json(plan.environment_move)}}},
          {"skills", skills}};
}

GroupTransformPlan plan_from_json(const json& j) {
  try {
    GroupTransformPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    const json& n = j.at("plane").at("normal");
    plan.plane.normal = {n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()};
    plan.plane.offset = j.at("plane").at("offset").get<double>();
    plan.table_to_camera = pose_from_json(j.at("table_to_camera"));
    plan.environment = pose_from_json(j.at("environment").at("transform"));
    plan.environment_move = move_from_json(j.at("environment").at("move"));
    for (const json& s : j.at("skills")) {
      plan.sampled.push_back(s.at("sampled").get<bool>());
      plan.skill_transforms.push_back(pose_from_json(s.at("transform")));
      plan.moves.push_back(move_from_json(s.at("move")));
      plan.effective.push_back(pose_from_json(s.at("effective")));
    }
    return plan;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed plan: ") + e.what());
  }
}

IdSet update_fixed_set(const IdSet& fixed, const IdSet& target, const IdSet& hand) {
  IdSet out = fixed;
  out.insert(target.begin(), target.end());
  for (int id : hand) out.erase(id);
  return out;
}

std::vector<bool> sampled_skills(const AnnotationSet& ann) {
  const std::vector<Segment> sk = skills(ann);
  std::vector<bool> sampled(sk.size(), false);
  IdSet fixed;
  for (std::size_t i = sk.size(); i-- > 0;) {
    const IdSet group = sk[i].group();
    sampled[i] = !group.empty() && !intersects(group, fixed);
    fixed = update_fixed_set(fixed, sk[i].target, sk[i].held());
  }
  return sampled;
}

namespace {

// Placement inherited by a fixed group from the objects' known transforms.
Pose inherited(const Segment& s, const IdSet& fixed, const std::map<int, Pose>& current, int skill) {
  std::optional<Pose> e;
  for (int id : s.group()) {
    if (!fixed.count(id)) continue;
    const auto it = current.find(id);
    if (it == current.end()) continue;
    if (!e) {
      e = it->second;
    } else if ((e->matrix() - it->second.matrix()).cwiseAbs().maxCoeff() > 1e-12) {
      throw PlanConflict("skill " + std::to_string(skill + 1) +
                         " holds fixed objects that received different placements");
    }
  }
  return e.value_or(Pose::Identity());
}

}  // namespace

std::vector<Pose> propagate_transforms(const AnnotationSet& ann, const std::vector<Pose>& transforms,
                                       const std::vector<bool>& sampled) {
  const std::vector<Segment> sk = skills(ann);
  std::vector<Pose> effective(sk.size(), Pose::Identity());
  std::map<int, Pose> current;
  IdSet fixed;
  for (std::size_t i = sk.size(); i-- > 0;) {
    const IdSet group = sk[i].group();
    effective[i] = sampled[i] ? transforms[i] : inherited(sk[i], fixed, current, static_cast<int>(i));
    for (int id : group) current[id] = effective[i];
    fixed = update_fixed_set(fixed, sk[i].target, sk[i].held());
  }
  return effective;
}

std::vector<Action> augment_skill(std::span<const Action> actions, const Pose& t) {
  std::vector<Action> out(actions.begin(), actions.end());
  for (Action& a : out)
    for (Pose& p : a.ee) p = t * p;
  return out;
}

AugmentContext::AugmentContext(const ParsedScene& scene, const AnnotationSet& ann, const PlaneFitOptions& fit)
    : scene_(&scene), ann_(&ann), skills_(pcdgen::skills(ann)) {
  if (ann.horizon > scene.demo.horizon())
    throw RangeError("annotation covers " + std::to_string(ann.horizon) + " frames, demonstration has " +
                     std::to_string(scene.demo.horizon()));
  if (ann.arm_count != scene.demo.arm_count)
    throw SchemaError("annotation arm count differs from the demonstration");
  for (const Segment& s : skills_)
    for (int id : s.group())
      if (scene.index_of(id) < 0) throw RangeError("object id " + std::to_string(id) + " has no template");

  const Plane plane = fit_table_plane(scene.environment, fit);
  // Table origin: where the optical axis meets the table.
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  if (std::abs(plane.normal.z()) > 1e-6) anchor.z() = -plane.offset / plane.normal.z();
  table_ = TableFrame(plane, anchor);

  footprints_.resize(skills_.size());
  for (std::size_t i = 0; i < skills_.size(); ++i) {
    const int t = skills_[i].start_frame - 1;
    for (int k = 0; k < scene.object_count(); ++k) {
      const PointCloud cloud = scene.object_cloud(t, k);
      std::vector<Eigen::Vector2d> pts;
      pts.reserve(static_cast<std::size_t>(cloud.size()));
      for (Eigen::Index r = 0; r < cloud.size(); ++r)
        pts.push_back(table_.to_table(cloud.points.row(r).transpose().cast<double>()));
      footprints_[i].push_back(convex_hull(std::move(pts)));
    }
  }
}

bool AugmentContext::group_is_rigid(int skill) const {
  for (int id : skills_[static_cast<std::size_t>(skill)].group())
    if (!scene_->templates[static_cast<std::size_t>(scene_->index_of(id))].rigid) return false;
  return true;
}

namespace {

Eigen::Vector2d group_pivot(const AugmentContext& ctx, int skill) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  int count = 0;
  for (int id : ctx.skills()[static_cast<std::size_t>(skill)].group())
    for (const auto& v : ctx.footprint(skill, ctx.scene().index_of(id))) {
      sum += v;
      ++count;
    }
  return count ? Eigen::Vector2d(sum / count) : Eigen::Vector2d::Zero();
}

// Placement of object `id` while skill `at` runs, as far as it is decided once
// every skill after `skill` has been planned; nullopt while it still depends
// on an earlier skill.
std::optional<Pose> known_placement(const std::vector<Segment>& sk, const std::vector<Pose>& effective, int id,
                                    int at, int skill) {
  for (int j = at; j < static_cast<int>(sk.size()); ++j)
    if (sk[static_cast<std::size_t>(j)].group().count(id)) return effective[static_cast<std::size_t>(j)];
  for (int j = at - 1; j >= 0; --j)
    if (sk[static_cast<std::size_t>(j)].group().count(id)) {
      if (j > skill) return effective[static_cast<std::size_t>(j)];
      return std::nullopt;
    }
  return Pose::Identity();
}

bool placement_valid(const AugmentContext& ctx, const SamplerConfig& cfg, int skill, const PlanarMove& move,
                     const std::vector<Pose>& effective) {
  const auto& sk = ctx.skills();
  const IdSet group = sk[static_cast<std::size_t>(skill)].group();
  const Planar pm = Planar::of(move);
  const auto index = [&](int id) { return ctx.scene().index_of(id); };
  if (ctx.group_is_rigid(skill))
    for (int id : group)
      for (const auto& v : pm.apply(ctx.footprint(skill, index(id))))
        if (!cfg.workspace.contains(v)) return false;

  // Group objects keep this placement until their next skill; check them
  // against everything whose placement is already decided at each skill start.
  for (int at = skill; at < static_cast<int>(sk.size()); ++at) {
    std::vector<Polygon> moved;
    for (int id : group) {
      bool resting = true;
      for (int j = skill + 1; j <= at; ++j) resting = resting && !sk[static_cast<std::size_t>(j)].group().count(id);
      if (!resting) continue;
      Polygon poly = pm.apply(ctx.footprint(at, index(id)));
      if (!poly.empty()) moved.push_back(std::move(poly));
    }
    if (moved.empty()) break;
    for (int k = 0; k < ctx.scene().object_count(); ++k) {
      const int id = ctx.scene().templates[static_cast<std::size_t>(k)].id;
      if (group.count(id)) continue;
      const Polygon& src = ctx.footprint(at, k);
      if (src.empty()) continue;
      const std::optional<Pose> place = known_placement(sk, effective, id, at, skill);
      if (!place) continue;
      const Polygon other = Planar::of(*place, ctx.table()).apply(src);
      for (const Polygon& g : moved)
        if (polygon_distance(g, other) < cfg.clearance) return false;
    }
  }
  return true;
}

GroupTransformPlan backtrack(const AugmentContext& ctx, const SamplerConfig& cfg, std::mt19937_64& rng,
                             const Proposer& propose) {
  const auto& sk = ctx.skills();
  GroupTransformPlan plan;
  plan.plane = ctx.table().plane();
  plan.table_to_camera = ctx.table().table_to_camera();
  plan.sampled = sampled_skills(ctx.annotation());
  plan.skill_transforms.assign(sk.size(), Pose::Identity());
  plan.moves.assign(sk.size(), PlanarMove{});
  plan.effective.assign(sk.size(), Pose::Identity());

  std::map<int, Pose> current;
  IdSet fixed;
  for (std::size_t i = sk.size(); i-- > 0;) {
    const int skill = static_cast<int>(i);
    if (plan.sampled[i]) {
      bool found = false;
      for (int attempt = 0; attempt < cfg.max_attempts && !found; ++attempt) {
        const PlanarMove m = propose(skill, rng);
        if (cfg.mode == SamplingMode::kIdentity || placement_valid(ctx, cfg, skill, m, plan.effective)) {
          plan.moves[i] = m;
          found = true;
        }
      }
      if (!found)
        throw SamplingExhausted("no valid placement for skill " + std::to_string(skill + 1) + " after " +
                                std::to_string(cfg.max_attempts) + " attempts");
      plan.skill_transforms[i] =
          cfg.mode == SamplingMode::kIdentity ? Pose::Identity() : apply_move(ctx.table(), plan.moves[i]);
      plan.effective[i] = plan.skill_transforms[i];
    } else {
      plan.effective[i] = inherited(sk[i], fixed, current, skill);
    }
    for (int id : sk[i].group()) current[id] = plan.effective[i];
    fixed = update_fixed_set(fixed, sk[i].target, sk[i].held());
  }
  return plan;
}

}  // namespace

GroupTransformPlan plan_augmentation(const AugmentContext& ctx, const SamplerConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Proposer propose = [&](int skill, std::mt19937_64& g) {
    PlanarMove m;
    if (cfg.mode == SamplingMode::kIdentity) return m;
    m.pivot = group_pivot(ctx, skill);
    if (!ctx.group_is_rigid(skill)) {
      m.angle = uniform(g, -cfg.nonrigid_rotation, cfg.nonrigid_rotation);
      m.shift = uniform_disc(g, cfg.nonrigid_translation);
      return m;
    }
    Eigen::Vector2d q;
    if (cfg.mode == SamplingMode::kGrid) {
      const auto n = cfg.locations.size();
      q = cfg.locations[std::uniform_int_distribution<std::size_t>(0, n - 1)(g)];
    } else {
      q = {uniform(g, cfg.workspace.lo.x(), cfg.workspace.hi.x()),
           uniform(g, cfg.workspace.lo.y(), cfg.workspace.hi.y())};
    }
    m.angle = uniform(g, cfg.rotation_min, cfg.rotation_max);
    m.shift = q - m.pivot;
    return m;
  };
  GroupTransformPlan plan = backtrack(ctx, cfg, rng, propose);
  if (cfg.mode != SamplingMode::kIdentity) {
    plan.environment_move.angle = uniform(rng, -cfg.env_rotation, cfg.env_rotation);
    plan.environment_move.shift = {uniform(rng, -cfg.env_translation, cfg.env_translation),
                                   uniform(rng, -cfg.env_translation, cfg.env_translation)};
  }
  plan.environment =
      cfg.mode == SamplingMode::kIdentity ? Pose::Identity() : apply_move(ctx.table(), plan.environment_move);
  plan.seed = seed;
  return plan;
}

GroupTransformPlan perturb_plan(const AugmentContext& ctx, const GroupTransformPlan& base,
                                const SamplerConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Proposer propose = [&](int skill, std::mt19937_64& g) {
    PlanarMove m = base.moves[static_cast<std::size_t>(skill)];
    if (cfg.mode == SamplingMode::kIdentity) return m;
    const double scale_r = ctx.group_is_rigid(skill) ? 1.0 : 0.0;
    m.angle += scale_r * uniform(g, -cfg.perturb_rotation, cfg.perturb_rotation);
    m.shift += scale_r * uniform_disc(g, cfg.perturb_radius);
    return m;
  };
  GroupTransformPlan plan = backtrack(ctx, cfg, rng, propose);
  plan.environment = base.environment;
  plan.environment_move = base.environment_move;
  plan.seed = seed;
  return plan;
}

namespace {

bool shared_hold(const Segment& s, int arms) {
  return arms == 2 && !s.left_hand.empty() && s.left_hand == s.right_hand;
}

double max_step(const std::vector<Pose>& path) {
  double m = 0;
  for (std::size_t j = 1; j < path.size(); ++j)
    m = std::max(m, (path[j].translation() - path[j - 1].translation()).norm());
  return m;
}

}  // namespace

Trajectory augment_trajectory(const AugmentContext& ctx, const GroupTransformPlan& plan,
                              const MotionOptions& motion) {
  const AnnotationSet& ann = ctx.annotation();
  const Demonstration& src = ctx.scene().demo;
  const int arms = src.arm_count;
  MotionOptions mo = motion;
  mo.up = plan.plane.normal;

  Trajectory traj;
  std::vector<Segment> segments;
  int skill = 0;
  for (std::size_t s = 0; s < ann.segments.size(); ++s) {
    const Segment& seg = ann.segments[s];
    Segment out = seg;
    out.start_frame = static_cast<int>(traj.actions.size()) + 1;
    if (seg.is_skill()) {
      const auto first = src.frames.begin() + (seg.start_frame - 1);
      std::vector<Action> slice;
      for (auto it = first; it != src.frames.begin() + seg.end_frame; ++it) slice.push_back(it->action);
      for (Action& a : augment_skill(slice, plan.effective[static_cast<std::size_t>(skill)]))
        traj.actions.push_back(std::move(a));
      for (int t = seg.start_frame; t <= seg.end_frame; ++t) traj.source_frames.push_back(t);
      ++skill;
    } else {
      if (s + 1 >= ann.segments.size()) throw InterleaveError("motion segment without a following skill");
      const Segment& next = ann.segments[s + 1];
      const Pose& e = plan.effective[static_cast<std::size_t>(skill)];
      std::vector<Pose> start(static_cast<std::size_t>(arms)), goal(static_cast<std::size_t>(arms));
      for (int a = 0; a < arms; ++a) {
        start[a] = traj.actions.empty() ? src.frames.front().action.ee[a] : traj.actions.back().ee[a];
        goal[a] = e * src.frames[static_cast<std::size_t>(next.start_frame - 1)].action.ee[a];
      }
      int n = 2;
      for (int a = 0; a < arms; ++a) n = std::max(n, waypoint_count(start[a], goal[a], mo));
      std::vector<std::vector<Pose>> paths(static_cast<std::size_t>(arms));
      if (shared_hold(next, arms)) {
        const Pose offset = start[0].inverse() * start[1];
        for (;;) {
          paths[0] = interpolate_motion(start[0], goal[0], n, mo);
          paths[1] = paths[0];
          for (auto& p : paths[1]) p = p * offset;
          paths[1].front() = start[1];
          paths[1].back() = goal[1];
          const double worst = max_step(paths[1]);
          if (worst <= mo.step || n > 100000) break;
          n = static_cast<int>(std::ceil((n - 1) * worst / mo.step)) + 1;
        }
      } else {
        for (int a = 0; a < arms; ++a) paths[a] = interpolate_motion(start[a], goal[a], n, mo);
      }
      const auto idx = resample_indices(seg.length(), n);
      for (int j = 0; j + 1 < n; ++j) {
        const int t = seg.start_frame + idx[static_cast<std::size_t>(j)];
        Action act;
        for (int a = 0; a < arms; ++a) {
          act.ee.push_back(paths[a][static_cast<std::size_t>(j)]);
          act.grip.push_back(src.frames[static_cast<std::size_t>(t - 1)].action.grip[a]);
        }
        traj.actions.push_back(std::move(act));
        traj.source_frames.push_back(t);
      }
    }
    out.end_frame = static_cast<int>(traj.actions.size());
    segments.push_back(out);
  }
  traj.annotation = make_annotation(arms, segments);
  traj.annotation.mask_files = ann.mask_files;
  return traj;
}

AugmentedFrames augment_observations(const AugmentContext& ctx, const GroupTransformPlan& plan,
                                     const Trajectory& traj) {
  const ParsedScene& scene = ctx.scene();
  const auto& sk = ctx.skills();
  const int arms = scene.demo.arm_count;
  const int objects = scene.object_count();

  PointCloud env = scene.environment.has_labels() ? scene.environment : scene.environment.with_label(kEnvironmentLabel);
  env = transform_cloud(env, plan.environment);

  // Placement of object k while skill i is the current or upcoming skill.
  std::vector<std::vector<Pose>> placement(static_cast<std::size_t>(objects),
                                           std::vector<Pose>(sk.size(), Pose::Identity()));
  for (int k = 0; k < objects; ++k) {
    const int id = scene.templates[static_cast<std::size_t>(k)].id;
    std::optional<Pose> later;
    std::optional<Pose> last;
    for (std::size_t i = sk.size(); i-- > 0;)
      if (sk[i].group().count(id)) {
        if (!last) last = plan.effective[i];
      }
    for (std::size_t i = sk.size(); i-- > 0;) {
      if (sk[i].group().count(id)) later = plan.effective[i];
      placement[static_cast<std::size_t>(k)][i] = later ? *later : last.value_or(Pose::Identity());
    }
  }

  // Skill index current or upcoming at each generated frame.
  const auto& segs = traj.annotation.segments;
  AugmentedFrames out;
  const int frames = static_cast<int>(traj.actions.size());
  out.observations.resize(static_cast<std::size_t>(frames));
  out.object_poses.resize(static_cast<std::size_t>(frames));
  int skill = 0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Segment& seg = segs[s];
    const Segment* upcoming = seg.is_skill() ? &seg : &segs[s + 1];
    for (int g = seg.start_frame - 1; g < seg.end_frame; ++g) {
      const int src = traj.source_frames[static_cast<std::size_t>(g)] - 1;
      const Action& now = traj.actions[static_cast<std::size_t>(g)];
      const Action& was = scene.demo.frames[static_cast<std::size_t>(src)].action;
      std::vector<Pose> delta(static_cast<std::size_t>(arms));
      for (int a = 0; a < arms; ++a) delta[a] = now.ee[a] * was.ee[a].inverse();

      std::vector<PointCloud> parts;
      parts.reserve(static_cast<std::size_t>(1 + arms + objects));
      parts.push_back(env);
      const PointCloud& arm_cloud = scene.arm[static_cast<std::size_t>(src)];
      for (int a = 0; a < arms; ++a) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index r = 0; r < arm_cloud.size(); ++r)
          if (arm_cloud.labels(r) == arm_label(a)) rows.push_back(r);
        parts.push_back(transform_cloud(select(arm_cloud, rows), delta[a]));
      }
      auto& poses = out.object_poses[static_cast<std::size_t>(g)];
      poses.resize(static_cast<std::size_t>(objects));
      for (int k = 0; k < objects; ++k) {
        const ObjectTemplate& tpl = scene.templates[static_cast<std::size_t>(k)];
        Pose m = placement[static_cast<std::size_t>(k)][static_cast<std::size_t>(skill)];
        if (!seg.is_skill())
          for (int a = arms - 1; a >= 0; --a)
            if (upcoming->held_by(a).count(tpl.id)) m = delta[a];
        const auto label = static_cast<std::uint16_t>(tpl.id);
        if (tpl.rigid) {
          poses[k] = m * scene.object_poses[static_cast<std::size_t>(src)][k];
          parts.push_back(transform_cloud(tpl.cloud, poses[k]).with_label(label));
        } else {
          poses[k] = m;
          parts.push_back(transform_cloud(scene.nonrigid_clouds[static_cast<std::size_t>(src)][k], m)
                              .with_label(label));
        }
      }
      out.observations[static_cast<std::size_t>(g)] = concat(parts);
    }
    if (seg.is_skill()) ++skill;
  }
  return out;
}

void check_bimanual_constraint(const AnnotationSet& ann, std::span<const Action> actions, double tolerance) {
  if (ann.arm_count != 2) return;
  for (std::size_t s = 0; s + 1 < ann.segments.size(); ++s) {
    const Segment& seg = ann.segments[s];
    if (seg.is_skill() || !shared_hold(ann.segments[s + 1], 2)) continue;
    const auto rel = [&](int frame) {
      const Action& a = actions[static_cast<std::size_t>(frame - 1)];
      return Eigen::Matrix4d((a.ee[0].inverse() * a.ee[1]).matrix());
    };
    const Eigen::Matrix4d ref = rel(seg.start_frame);
    for (int t = seg.start_frame + 1; t <= seg.end_frame; ++t) {
      const double drift = (rel(t) - ref).cwiseAbs().maxCoeff();
      if (drift > tolerance)
        throw ConstraintViolation("inter-arm pose drifts by " + std::to_string(drift) +
                                      " during a shared-object motion",
                                  t);
    }
  }
}

GeneratedDemo materialize(const AugmentContext& ctx, const GroupTransformPlan& plan, const SamplerConfig& cfg) {
  const Trajectory traj = augment_trajectory(ctx, plan, cfg.motion);
  AugmentedFrames frames = augment_observations(ctx, plan, traj);
  GeneratedDemo out;
  out.demo.camera = ctx.scene().demo.camera;
  out.demo.arm_count = ctx.scene().demo.arm_count;
  out.demo.frames.resize(traj.actions.size());
  for (std::size_t g = 0; g < traj.actions.size(); ++g) {
    out.demo.frames[g].observation = std::move(frames.observations[g]);
    out.demo.frames[g].action = traj.actions[g];
  }
  out.annotation = traj.annotation;
  out.source_frames = traj.source_frames;
  out.object_poses = std::move(frames.object_poses);
  out.plan = plan;
  return out;
}

BatchPlan plan_batch(std::span<const AugmentContext* const> sources, const SamplerConfig& cfg,
                     std::uint64_t seed, int jobs) {
  cfg.validate();
  if (sources.empty()) throw ConfigError("no source demonstrations");
  const int R = cfg.replays, N = cfg.combinations, P = cfg.perturbations;
  BatchPlan batch;
  batch.requested = static_cast<std::size_t>(R) * N * P;

  struct Slot {
    std::vector<std::optional<PlannedTuple>> tuples;
    std::vector<std::string> warnings;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(R) * N);
  parallel_for(R * N, resolve_jobs(jobs), [&](int rn) {
    const int r = rn / N, n = rn % N;
    const int source = r % static_cast<int>(sources.size());
    const AugmentContext& ctx = *sources[static_cast<std::size_t>(source)];
    Slot& slot = slots[static_cast<std::size_t>(rn)];
    slot.tuples.resize(static_cast<std::size_t>(P));
    GroupTransformPlan base;
    try {
      base = plan_augmentation(ctx, cfg, derive_seed(seed ^ kCombinationSalt, static_cast<std::uint64_t>(n)));
    } catch (const SamplingExhausted& e) {
      slot.warnings.push_back("replay " + std::to_string(r) + " combination " + std::to_string(n) +
                              " skipped: " + e.what());
      return;
    }
    for (int p = 0; p < P; ++p) {
      PlannedTuple t;
      t.index = (static_cast<std::size_t>(r) * N + n) * P + p;
      t.replay = r;
      t.combination = n;
      t.perturbation = p;
      t.source = source;
      try {
        t.plan = perturb_plan(ctx, base, cfg, derive_seed(seed, t.index));
      } catch (const SamplingExhausted& e) {
        slot.warnings.push_back("demo " + std::to_string(t.index) + " skipped: " + e.what());
        continue;
      }
      slot.tuples[static_cast<std::size_t>(p)] = std::move(t);
    }
  });
  for (Slot& slot : slots) {
    for (auto& t : slot.tuples)
      if (t) batch.tuples.push_back(std::move(*t));
    for (auto& w : slot.warnings) batch.warnings.push_back(std::move(w));
  }
  if (batch.tuples.size() < batch.requested)
    batch.warnings.push_back("produced " + std::to_string(batch.tuples.size()) + " of " +
                             std::to_string(batch.requested) + " requested demonstrations");
  return batch;
}

GeneratedDemo materialize(std::span<const AugmentContext* const> sources, const PlannedTuple& tuple,
                          const SamplerConfig& cfg) {
  GeneratedDemo d = materialize(*sources[static_cast<std::size_t>(tuple.source)], tuple.plan, cfg);
  d.index = tuple.index;
  d.replay = tuple.replay;
  d.combination = tuple.combination;
  d.perturbation = tuple.perturbation;
  d.source = tuple.source;
  return d;
}

GenerateSummary generate(std::span<const AugmentContext* const> sources, const SamplerConfig& cfg,
                         std::uint64_t seed, int jobs, const std::function<void(GeneratedDemo&&)>& sink) {
  const BatchPlan batch = plan_batch(sources, cfg, seed, jobs);
  parallel_for(static_cast<int>(batch.tuples.size()), resolve_jobs(jobs), [&](int i) {
    sink(materialize(sources, batch.tuples[static_cast<std::size_t>(i)], cfg));
  });
  return {batch.requested, batch.tuples.size(), batch.warnings};
}

std::vector<GeneratedDemo> generate(std::span<const AugmentContext* const> sources, const SamplerConfig& cfg,
                                    std::uint64_t seed, int jobs, GenerateSummary* summary) {
  const BatchPlan batch = plan_batch(sources, cfg, seed, jobs);
  std::vector<GeneratedDemo> out(batch.tuples.size());
  parallel_for(static_cast<int>(batch.tuples.size()), resolve_jobs(jobs), [&](int i) {
    out[static_cast<std::size_t>(i)] = materialize(sources, batch.tuples[static_cast<std::size_t>(i)], cfg);
  });
  if (summary) *summary = {batch.requested, batch.tuples.size(), batch.warnings};
  return out;
}

}  // namespace pcdgen
