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

#include "pcdgen/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <sstream>

#include "pcdgen/container_io.hpp"
#include "pcdgen/errors.hpp"
#include "pcdgen/parallel.hpp"

namespace pcdgen {

namespace {

using json = nlohmann::json;

// Collects the first failure of one check.
struct Check {
  ValidationRecord rec;
  Check(const std::string& demo, const char* name) {
    rec.demo = demo;
    rec.check = name;
  }
  void fail(std::string detail, std::optional<int> skill = std::nullopt) {
    if (!rec.ok) return;
    rec.ok = false;
    rec.detail = std::move(detail);
    rec.skill = skill;
  }
};

bool bitwise_equal(const Pose& a, const Pose& b) {
  return std::memcmp(a.matrix().data(), b.matrix().data(), sizeof(double) * 16) == 0;
}

double max_abs(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) { return (a - b).cwiseAbs().maxCoeff(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

double rotation_angle(const Eigen::Matrix3d& r) {
  return std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

// Every in-plane transform keeps table points on the table.
double plane_drift(const Pose& t, const Plane& plane) {
  const Eigen::Vector3d n = plane.normal;
  const double rot = (t.linear() * n - n).norm();
  // A point on the plane: -offset * n.
  const Eigen::Vector3d p = -plane.offset * n;
  return std::max(rot, std::abs(plane.signed_distance(t * p)));
}

void check_annotation(const GeneratedRecord& g, const AugmentContext& src, Check& c) {
  const auto gen = skills(g.annotation);
  const auto& orig = src.skills();
  if (g.annotation.horizon != g.demo.horizon())
    c.fail("annotation horizon " + std::to_string(g.annotation.horizon) + " != " + std::to_string(g.demo.horizon()));
  if (gen.size() != orig.size()) {
    c.fail(std::to_string(gen.size()) + " skills, source has " + std::to_string(orig.size()));
    return;
  }
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (gen[i].length() != orig[i].length() || gen[i].target != orig[i].target ||
        gen[i].left_hand != orig[i].left_hand || gen[i].right_hand != orig[i].right_hand || gen[i].hand != orig[i].hand)
      c.fail("skill differs from its source skill", static_cast<int>(i));
  }
  if (g.source_frames.size() != static_cast<std::size_t>(g.demo.horizon()))
    c.fail("source frame map has " + std::to_string(g.source_frames.size()) + " entries");
}

void check_continuity(const GeneratedRecord& g, const AugmentContext& src, const PipelineConfig& cfg, Check& c) {
  const auto& segs = g.annotation.segments;
  const auto& frames = g.demo.frames;
  const int arms = g.demo.arm_count;
  const double bound = cfg.sampler.motion.step + cfg.tolerances.step_slack;
  const double angle_bound = cfg.sampler.motion.angle_step + cfg.tolerances.step_slack;
  int skill = 0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Segment& seg = segs[s];
    if (seg.is_skill()) {
      ++skill;
      continue;
    }
    for (int a = 0; a < arms; ++a) {
      const Pose& first = frames[static_cast<std::size_t>(seg.start_frame - 1)].action.ee[a];
      const Pose& expect = seg.start_frame == 1 ? src.scene().demo.frames.front().action.ee[a]
                                                : frames[static_cast<std::size_t>(seg.start_frame - 2)].action.ee[a];
      if (!bitwise_equal(first, expect))
        c.fail(seg.start_frame == 1 ? "motion does not start at the source start pose (arm " + std::to_string(a) + ")"
                                    : "motion start differs from the previous skill's last pose (arm " +
                                          std::to_string(a) + ")",
               skill);
      // Steps through the motion and into the next skill.
      const int last = std::min(seg.end_frame + 1, g.demo.horizon());
      for (int t = seg.start_frame + 1; t <= last; ++t) {
        const Pose& p = frames[static_cast<std::size_t>(t - 2)].action.ee[a];
        const Pose& q = frames[static_cast<std::size_t>(t - 1)].action.ee[a];
        const double step = (q.translation() - p.translation()).norm();
        const double turn = rotation_angle(p.linear().transpose() * q.linear());
        if (step > bound)
          c.fail("position step " + fmt(step) + " m at frame " + std::to_string(t) + " exceeds " + fmt(bound), skill);
        if (turn > angle_bound)
          c.fail("rotation step " + fmt(turn) + " rad at frame " + std::to_string(t) + " exceeds " + fmt(angle_bound),
                 skill);
      }
    }
  }
}

void check_gripper(const GeneratedRecord& g, const AugmentContext& src, Check& c) {
  const auto gen = skills(g.annotation);
  const auto& orig = src.skills();
  const auto& sf = src.scene().demo.frames;
  for (std::size_t i = 0; i < gen.size() && i < orig.size(); ++i) {
    if (gen[i].length() != orig[i].length()) continue;  // reported by the annotation check
    for (int j = 0; j < gen[i].length(); ++j) {
      const auto& a = g.demo.frames[static_cast<std::size_t>(gen[i].start_frame - 1 + j)].action.grip;
      const auto& b = sf[static_cast<std::size_t>(orig[i].start_frame - 1 + j)].action.grip;
      if (a != b) {
        c.fail("gripper sequence differs at skill frame " + std::to_string(j + 1), static_cast<int>(i));
        break;
      }
    }
  }
}

void check_rigidity(const GeneratedRecord& g, const AugmentContext& src, const PipelineConfig& cfg, Check& c) {
  const auto gen = skills(g.annotation);
  const auto& orig = src.skills();
  const ParsedScene& scene = src.scene();
  for (std::size_t i = 0; i < gen.size() && i < orig.size(); ++i) {
    bool failed = false;
    for (int gt = gen[i].start_frame - 1; gt < gen[i].end_frame && !failed; ++gt) {
      const int st = g.source_frames[static_cast<std::size_t>(gt)] - 1;
      // Members: the rigid objects of the group plus every end-effector.
      std::vector<Pose> now, was;
      for (int id : orig[i].group()) {
        const int k = scene.index_of(id);
        if (k < 0 || !scene.templates[static_cast<std::size_t>(k)].rigid) continue;
        now.push_back(g.object_poses[static_cast<std::size_t>(gt)][static_cast<std::size_t>(k)]);
        was.push_back(scene.object_poses[static_cast<std::size_t>(st)][static_cast<std::size_t>(k)]);
      }
      for (int a = 0; a < g.demo.arm_count; ++a) {
        now.push_back(g.demo.frames[static_cast<std::size_t>(gt)].action.ee[a]);
        was.push_back(scene.demo.frames[static_cast<std::size_t>(st)].action.ee[a]);
      }
      for (std::size_t m = 1; m < now.size(); ++m) {
        const double drift =
            max_abs((now[0].inverse() * now[m]).matrix(), (was[0].inverse() * was[m]).matrix());
        if (drift > cfg.tolerances.rigidity) {
          c.fail("relative pose inside the group drifts by " + fmt(drift) + " at frame " + std::to_string(gt + 1),
                 static_cast<int>(i));
          failed = true;
          break;
        }
      }
    }
  }
}

void check_plane(const GeneratedRecord& g, const AugmentContext& src, const PipelineConfig& cfg, Check& c) {
  const Plane& fitted = src.table().plane();
  const double normal_err = (g.plan.plane.normal - fitted.normal).norm();
  const double offset_err = std::abs(g.plan.plane.offset - fitted.offset);
  if (std::max(normal_err, offset_err) > cfg.tolerances.plane)
    c.fail("plan plane differs from the source table plane by " + fmt(std::max(normal_err, offset_err)));
  if (plane_drift(g.plan.environment, fitted) > cfg.tolerances.plane)
    c.fail("environment transform leaves the table plane");
  for (std::size_t i = 0; i < g.plan.effective.size(); ++i)
    if (plane_drift(g.plan.effective[i], fitted) > cfg.tolerances.plane)
      c.fail("skill transform leaves the table plane", static_cast<int>(i));
}

void check_plan(const GeneratedRecord& g, const AugmentContext& src, Check& c) {
  const AnnotationSet& ann = src.annotation();
  const auto& orig = src.skills();
  const GroupTransformPlan& plan = g.plan;
  if (plan.skill_transforms.size() != orig.size() || plan.effective.size() != orig.size() ||
      plan.sampled.size() != orig.size()) {
    c.fail("plan covers " + std::to_string(plan.effective.size()) + " skills, source has " +
           std::to_string(orig.size()));
    return;
  }
  if (plan.sampled != sampled_skills(ann)) c.fail("sampled flags disagree with the fixed-set rule");
  std::vector<Pose> effective;
  try {
    effective = propagate_transforms(ann, plan.skill_transforms, plan.sampled);
  } catch (const Error& e) {
    c.fail(std::string("transform propagation failed: ") + e.what());
    return;
  }
  for (std::size_t i = 0; i < orig.size(); ++i)
    if (max_abs(effective[i].matrix(), plan.effective[i].matrix()) > 1e-12)
      c.fail("effective transform does not follow from the sampled ones", static_cast<int>(i));
  // Skill actions are the source actions moved by the effective transform.
  const auto gen = skills(g.annotation);
  for (std::size_t i = 0; i < gen.size() && i < orig.size(); ++i) {
    if (gen[i].length() != orig[i].length()) continue;
    for (int j = 0; j < gen[i].length(); ++j) {
      const Action& a = g.demo.frames[static_cast<std::size_t>(gen[i].start_frame - 1 + j)].action;
      const Action& b = src.scene().demo.frames[static_cast<std::size_t>(orig[i].start_frame - 1 + j)].action;
      bool bad = false;
      for (std::size_t arm = 0; arm < a.ee.size(); ++arm)
        bad |= max_abs(a.ee[arm].matrix(), (plan.effective[i] * b.ee[arm]).matrix()) > 1e-9;
      if (bad) {
        c.fail("skill action at skill frame " + std::to_string(j + 1) + " is not the transformed source action",
               static_cast<int>(i));
        break;
      }
    }
  }
}

void check_observations(const GeneratedRecord& g, Check& c) {
  if (!g.effective_camera) return;
  const CameraModel& cam = *g.effective_camera;
  const double slack = 1e-3;
  for (int t = 0; t < g.demo.horizon(); ++t) {
    const Points& pts = g.demo.frames[static_cast<std::size_t>(t)].observation.points;
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      const double z = pts(r, 2);
      const double u = cam.fx * pts(r, 0) / z + cam.cx;
      const double v = cam.fy * pts(r, 1) / z + cam.cy;
      if (!(z > 0) || u < -slack || v < -slack || u > cam.width + slack || v > cam.height + slack) {
        c.fail("frame " + std::to_string(t + 1) + " has a point outside the effective camera");
        return;
      }
    }
  }
}

}  // namespace

std::size_t ValidationReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const ValidationRecord& r) { return !r.ok; }));
}

json record_to_json(const ValidationRecord& r) {
  json j = {{"demo", r.demo}, {"check", r.check}, {"ok", r.ok}};
  if (r.skill) j["skill"] = *r.skill;
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

json summary_to_json(const ValidationReport& report) {
  return {{"summary", true},
          {"demos", report.demos},
          {"checks", report.records.size()},
          {"failures", report.failures()},
          {"ok", report.ok()}};
}

GeneratedRecord record_from(const GeneratedDemo& demo, std::string name) {
  GeneratedRecord r;
  r.name = std::move(name);
  r.demo = demo.demo;
  r.annotation = demo.annotation;
  r.source_frames = demo.source_frames;
  r.object_poses = demo.object_poses;
  r.plan = demo.plan;
  r.source = demo.source;
  return r;
}

std::vector<ValidationRecord> validate_demo(const GeneratedRecord& g, const AugmentContext& source,
                                            const PipelineConfig& cfg) {
  std::vector<ValidationRecord> out;
  Check container(g.name, "container");
  try {
    g.demo.validate();
    if (g.demo.arm_count != source.scene().demo.arm_count) container.fail("arm count differs from the source");
    if (g.object_poses.size() != static_cast<std::size_t>(g.demo.horizon())) container.fail("pose track length");
  } catch (const Error& e) {
    container.fail(e.what());
  }
  out.push_back(container.rec);
  if (!container.rec.ok) return out;

  Check annotation(g.name, "annotation");
  check_annotation(g, source, annotation);
  out.push_back(annotation.rec);
  if (!annotation.rec.ok) return out;

  Check continuity(g.name, "continuity");
  check_continuity(g, source, cfg, continuity);
  out.push_back(continuity.rec);

  Check gripper(g.name, "gripper");
  check_gripper(g, source, gripper);
  out.push_back(gripper.rec);

  Check rigidity(g.name, "rigidity");
  check_rigidity(g, source, cfg, rigidity);
  out.push_back(rigidity.rec);

  Check bimanual(g.name, "bimanual");
  try {
    std::vector<Action> actions;
    actions.reserve(g.demo.frames.size());
    for (const Frame& f : g.demo.frames) actions.push_back(f.action);
    check_bimanual_constraint(g.annotation, actions, cfg.tolerances.bimanual);
  } catch (const ConstraintViolation& e) {
    int skill = 0;
    for (const Segment& s : g.annotation.segments) {
      if (s.is_skill() && s.start_frame <= e.frame()) ++skill;
    }
    bimanual.fail(e.what(), skill);
  }
  out.push_back(bimanual.rec);

  Check plane(g.name, "plane");
  check_plane(g, source, cfg, plane);
  out.push_back(plane.rec);

  Check plan(g.name, "plan");
  check_plan(g, source, plan);
  out.push_back(plan.rec);

  Check obs(g.name, "observations");
  check_observations(g, obs);
  out.push_back(obs.rec);
  return out;
}

ValidationReport validate_dataset(const fs::path& root, int jobs) {
  ValidationReport report;
  DatasetInfo info;
  try {
    info = read_dataset_info(root);
  } catch (const Error& e) {
    report.records.push_back({root.filename().string(), "dataset", false, std::nullopt, e.what()});
    return report;
  }
  std::vector<std::unique_ptr<LoadedSource>> loaded;
  std::vector<std::unique_ptr<AugmentContext>> contexts;
  std::vector<int> ids;
  for (std::size_t s = 0; s < info.sources.size(); ++s) {
    try {
      loaded.push_back(std::make_unique<LoadedSource>(load_source(info.sources[s])));
      contexts.push_back(std::make_unique<AugmentContext>(loaded.back()->scene, loaded.back()->annotation));
      if (ids.empty())
        for (const auto& t : loaded.back()->scene.templates) ids.push_back(t.id);
    } catch (const Error& e) {
      report.records.push_back({"source_" + std::to_string(s), "source", false, std::nullopt, e.what()});
      return report;
    }
  }
  std::vector<std::string> names;
  try {
    names = list_generated(root);
  } catch (const Error& e) {
    report.records.push_back({root.filename().string(), "dataset", false, std::nullopt, e.what()});
    return report;
  }
  report.demos = names.size();
  if (names.size() != info.produced)
    report.records.push_back({root.filename().string(), "dataset", false, std::nullopt,
                              std::to_string(names.size()) + " demos on disk, " + std::to_string(info.produced) +
                                  " recorded"});

  std::vector<std::vector<ValidationRecord>> per(names.size());
  parallel_for(static_cast<int>(names.size()), resolve_jobs(jobs), [&](int i) {
    const std::string& name = names[static_cast<std::size_t>(i)];
    auto& recs = per[static_cast<std::size_t>(i)];
    GeneratedRecord g;
    try {
      g = read_generated(root, name, ids);
    } catch (const Error& e) {
      recs.push_back({name, "container", false, std::nullopt, e.what()});
      return;
    }
    if (g.source < 0 || static_cast<std::size_t>(g.source) >= contexts.size()) {
      recs.push_back({name, "container", false, std::nullopt, "unknown source index"});
      return;
    }
    if (info.effective_camera && g.effective_camera != info.effective_camera)
      recs.push_back({name, "container", false, std::nullopt, "effective camera differs from the dataset's"});
    recs = [&] {
      auto r = validate_demo(g, *contexts[static_cast<std::size_t>(g.source)], info.config);
      if (!recs.empty()) r.insert(r.begin(), recs.begin(), recs.end());
      return r;
    }();
  });
  for (auto& recs : per)
    for (auto& r : recs) report.records.push_back(std::move(r));
  return report;
}

}  // namespace pcdgen
