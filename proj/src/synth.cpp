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

#include "pcdgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "pcdgen/container_io.hpp"
#include "pcdgen/errors.hpp"
#include "pcdgen/seed.hpp"
#include "pcdgen/table_plane.hpp"

namespace pcdgen {

namespace {

using json = nlohmann::json;

constexpr double kDeg = M_PI / 180.0;

Eigen::Matrix3d ee_rotation(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, s, 0, s, -c, 0, 0, 0, -1;
  return r;
}

Pose world_pose(const Eigen::Vector3d& p, double yaw) {
  return make_pose(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(), p);
}

Pose lerp(const Pose& a, const Pose& b, double f) {
  const Eigen::Quaterniond q = Eigen::Quaterniond(a.linear()).slerp(f, Eigen::Quaterniond(b.linear()));
  return make_pose(q.normalized().toRotationMatrix(), (1 - f) * a.translation() + f * b.translation());
}

Pose raised(const Pose& p, double h) {
  Pose out = p;
  out.translation().z() += h;
  return out;
}

std::array<std::uint8_t, 3> color_of(std::uint16_t label) {
  if (label == kEnvironmentLabel) return {150, 130, 110};
  if (is_arm_label(label)) return {60, 60, 60};
  const std::uint32_t h = static_cast<std::uint32_t>(splitmix64(label));
  return {static_cast<std::uint8_t>(64 + (h & 127)), static_cast<std::uint8_t>(64 + ((h >> 8) & 127)),
          static_cast<std::uint8_t>(64 + ((h >> 16) & 127))};
}

// Calls fn(local point, outward normal) for grid samples over a primitive's surface. With
// rng, each sample is jittered uniformly inside its grid cell; otherwise it
// sits at the cell centre.
template <typename Fn>
void for_each_surface_sample(const Primitive& p, double spacing, std::mt19937_64* rng, Fn&& fn) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto jitter = [&]() { return rng ? unit(*rng) : 0.5; };
  auto grid = [&](double a, double b, auto&& emit) {
    const int na = std::max(1, static_cast<int>(std::ceil(a / spacing)));
    const int nb = std::max(1, static_cast<int>(std::ceil(b / spacing)));
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) emit((i + jitter()) * a / na, (j + jitter()) * b / nb);
  };
  const double sx = p.size.x(), sy = p.size.y(), sz = p.size.z();
  if (p.shape == Shape::kBox) {
    const double hx = sx / 2, hy = sy / 2;
    for (double z : {0.0, sz}) {
      const Eigen::Vector3d n(0, 0, z > 0 ? 1 : -1);
      grid(sx, sy, [&](double a, double b) { fn(Eigen::Vector3d(a - hx, b - hy, z), n); });
    }
    for (double y : {-hy, hy}) {
      const Eigen::Vector3d n(0, y > 0 ? 1 : -1, 0);
      grid(sx, sz, [&](double a, double b) { fn(Eigen::Vector3d(a - hx, y, b), n); });
    }
    for (double x : {-hx, hx}) {
      const Eigen::Vector3d n(x > 0 ? 1 : -1, 0, 0);
      grid(sy, sz, [&](double a, double b) { fn(Eigen::Vector3d(x, a - hy, b), n); });
    }
    return;
  }
  const double r = sx;
  grid(2 * M_PI * r, sz, [&](double a, double b) {
    const double t = a / r;
    fn(Eigen::Vector3d(r * std::cos(t), r * std::sin(t), b), Eigen::Vector3d(std::cos(t), std::sin(t), 0));
  });
  for (double z : {0.0, sz}) {
    const Eigen::Vector3d n(0, 0, z > 0 ? 1 : -1);
    grid(2 * r, 2 * r, [&](double a, double b) {
      const double x = a - r, y = b - r;
      if (x * x + y * y <= r * r) fn(Eigen::Vector3d(x, y, z), n);
    });
  }
}

Polygon footprint(const Primitive& p, const Eigen::Vector3d& placement) {
  std::vector<Eigen::Vector2d> pts;
  const Eigen::Rotation2Dd rot(placement.z());
  const Eigen::Vector2d c = placement.head<2>();
  if (p.shape == Shape::kBox) {
    for (int sx : {-1, 1})
      for (int sy : {-1, 1}) pts.push_back(c + rot * Eigen::Vector2d(sx * p.size.x() / 2, sy * p.size.y() / 2));
  } else {
    for (int i = 0; i < 32; ++i) {
      const double t = 2 * M_PI * i / 32;
      pts.push_back(c + p.size.x() * Eigen::Vector2d(std::cos(t), std::sin(t)));
    }
  }
  return convex_hull(pts);
}

Primitive arm_primitive(int arm) {
  Primitive p;
  p.id = arm_label(arm);
  p.shape = Shape::kCylinder;
  p.size = {kArmRadius, kArmRadius, kArmLength};
  return p;
}

// The proxy extends from the end effector against its approach axis.
Pose arm_frame(const Pose& ee) {
  return ee * Pose(Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()));
}

}  // namespace

Pose SceneSpec::camera_from_world() const {
  const double p = camera_pitch;
  const double dist = camera_height / std::sin(p);
  const Eigen::Vector3d centre(0, -dist * std::cos(p), camera_height);
  const Eigen::Vector3d z(0, std::cos(p), -std::sin(p));
  const Eigen::Vector3d x(1, 0, 0);
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r << x, y, z;
  return make_pose(r, centre).inverse();
}

SceneSpec scene_spec_from_json(const json& j) {
  try {
    SceneSpec s;
    if (j.contains("camera")) s.camera = camera_from_json(j.at("camera"));
    s.camera_height = j.value("camera_height", s.camera_height);
    if (j.contains("camera_pitch_deg")) s.camera_pitch = j.at("camera_pitch_deg").get<double>() * kDeg;
    if (j.contains("table_half_extent"))
      s.table_half_extent = {j["table_half_extent"].at(0).get<double>(), j["table_half_extent"].at(1).get<double>()};
    s.density = j.value("density", s.density);
    s.template_spacing = j.value("template_spacing", s.template_spacing);
    s.arms = j.value("arms", s.arms);
    if (s.arms != 1 && s.arms != 2) throw SpecError("arms must be 1 or 2");
    for (const json& h : j.at("home")) s.home.emplace_back(h.at(0).get<double>(), h.at(1).get<double>(), h.at(2).get<double>());
    if (static_cast<int>(s.home.size()) != s.arms) throw SpecError("one home position per arm required");
    s.approach_height = j.value("approach_height", s.approach_height);
    s.motion_frames = j.value("motion_frames", s.motion_frames);
    s.skill_frames = j.value("skill_frames", s.skill_frames);
    s.open_width = j.value("open_width", s.open_width);
    s.closed_width = j.value("closed_width", s.closed_width);
    if (s.motion_frames < 1 || s.skill_frames < 1) throw SpecError("segment frame counts must be >= 1");
    if (!(s.density >= 1.0)) throw SpecError("density must be >= 1 sample per pixel axis");
    if (!(s.template_spacing > 0)) throw SpecError("template spacing must be positive");
    for (const json& o : j.at("objects")) {
      Primitive p;
      p.id = o.at("id").get<int>();
      const std::string shape = o.at("shape").get<std::string>();
      if (shape == "box") {
        p.shape = Shape::kBox;
        p.size = {o.at("size").at(0).get<double>(), o.at("size").at(1).get<double>(), o.at("size").at(2).get<double>()};
      } else if (shape == "cylinder") {
        p.shape = Shape::kCylinder;
        const double r = o.at("radius").get<double>();
        p.size = {r, r, o.at("height").get<double>()};
      } else {
        throw SpecError("unknown shape '" + shape + "'");
      }
      if (!(p.size.minCoeff() > 0)) throw SpecError("primitive dimensions must be positive");
      p.rigid = o.value("rigid", true);
      s.objects.push_back(p);
      s.placements.emplace_back(o.at("position").at(0).get<double>(), o.at("position").at(1).get<double>(),
                                o.value("yaw_deg", 0.0) * kDeg);
    }
    for (const json& st : j.at("script")) {
      ScriptStep step;
      step.op = st.at("op").get<std::string>();
      step.object = st.at("object").get<int>();
      step.arm = st.value("arm", 0);
      if (st.contains("position")) step.position = {st["position"].at(0).get<double>(), st["position"].at(1).get<double>()};
      if (st.contains("yaw_deg")) step.yaw = st["yaw_deg"].get<double>() * kDeg;
      step.on = st.value("on", 0);
      if (st.contains("targets")) step.targets = st["targets"].get<std::vector<int>>();
      s.script.push_back(step);
    }
    return s;
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed scene spec: ") + e.what());
  }
}

json scene_spec_to_json(const SceneSpec& s) {
  json objects = json::array();
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const Primitive& p = s.objects[i];
    json o = {{"id", p.id}, {"rigid", p.rigid}};
    if (p.shape == Shape::kBox) {
      o["shape"] = "box";
      o["size"] = {p.size.x(), p.size.y(), p.size.z()};
    } else {
      o["shape"] = "cylinder";
      o["radius"] = p.size.x();
      o["height"] = p.size.z();
    }
    o["position"] = {s.placements[i].x(), s.placements[i].y()};
    o["yaw_deg"] = s.placements[i].z() / kDeg;
    objects.push_back(o);
  }
  json script = json::array();
  for (const ScriptStep& st : s.script) {
    json o = {{"op", st.op}, {"object", st.object}, {"arm", st.arm}};
    if (st.op == "place" || st.op == "bi_place") o["position"] = {st.position.x(), st.position.y()};
    if (st.yaw) o["yaw_deg"] = *st.yaw / kDeg;
    if (st.on) o["on"] = st.on;
    if (!st.targets.empty()) o["targets"] = st.targets;
    script.push_back(o);
  }
  json home = json::array();
  for (const auto& h : s.home) home.push_back({h.x(), h.y(), h.z()});
  return {{"camera", camera_to_json(s.camera)},
          {"camera_height", s.camera_height},
          {"camera_pitch_deg", s.camera_pitch / kDeg},
          {"table_half_extent", {s.table_half_extent.x(), s.table_half_extent.y()}},
          {"density", s.density},
          {"template_spacing", s.template_spacing},
          {"arms", s.arms},
          {"home", home},
          {"approach_height", s.approach_height},
          {"motion_frames", s.motion_frames},
          {"skill_frames", s.skill_frames},
          {"open_width", s.open_width},
          {"closed_width", s.closed_width},
          {"objects", objects},
          {"script", script}};
}

PointCloud sample_primitive(const Primitive& p, double spacing) {
  std::vector<Eigen::Vector3d> pts;
  for_each_surface_sample(p, spacing, nullptr, [&](const Eigen::Vector3d& x, const Eigen::Vector3d&) { pts.push_back(x); });
  PointCloud out;
  out.points.resize(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) out.points.row(static_cast<Eigen::Index>(i)) = pts[i].cast<float>().transpose();
  const auto c = color_of(static_cast<std::uint16_t>(p.id));
  out.colors.resize(out.points.rows(), 3);
  for (Eigen::Index i = 0; i < out.points.rows(); ++i) out.colors.row(i) << c[0], c[1], c[2];
  out.labels = Labels::Constant(out.points.rows(), static_cast<std::uint16_t>(p.id));
  return out;
}

Rendering render(const SceneConfiguration& config, const CameraModel& cam) {
  const int w = cam.width, h = cam.height;
  const double f = std::max(cam.fx, cam.fy);
  const std::size_t cells = static_cast<std::size_t>(w) * h;
  std::vector<double> best(cells, std::numeric_limits<double>::infinity());
  std::vector<Eigen::Vector3d> point(cells);
  std::vector<std::uint16_t> label(cells, 0);

  auto splat = [&](const Eigen::Vector3d& p, std::uint16_t lbl) {
    const double z = p.z();
    if (!(z >= cam.depth_min && z <= cam.depth_max)) return;
    const double u = cam.fx * p.x() / z + cam.cx, v = cam.fy * p.y() / z + cam.cy;
    if (!(u >= 0 && u < w && v >= 0 && v < h)) return;
    const std::size_t c = static_cast<std::size_t>(std::floor(v)) * w + static_cast<std::size_t>(std::floor(u));
    if (z < best[c]) {
      best[c] = z;
      point[c] = p;
      label[c] = lbl;
    }
  };

  if (config.with_table) {
    // Restrict table samples to the part of the plane seen by the camera.
    const Pose& env = config.environment;
    const Eigen::Vector3d n = env.linear().col(2), o = env.translation();
    Eigen::Vector2d lo = -config.table_half_extent, hi = config.table_half_extent;
    double z_near = std::numeric_limits<double>::infinity();
    bool bounded = true;
    Eigen::Vector2d vlo = Eigen::Vector2d::Constant(1e9), vhi = Eigen::Vector2d::Constant(-1e9);
    for (double u : {0.0, double(w)})
      for (double v : {0.0, double(h)}) {
        const Eigen::Vector3d d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
        const double denom = n.dot(d);
        const double t = std::abs(denom) > 1e-12 ? n.dot(o) / denom : -1;
        if (!(t > 0) || t > cam.depth_max) {
          bounded = false;
          continue;
        }
        z_near = std::min(z_near, t);
        const Eigen::Vector2d local = (env.inverse() * (t * d)).head<2>();
        vlo = vlo.cwiseMin(local);
        vhi = vhi.cwiseMax(local);
      }
    if (bounded) {
      const double margin = 0.02;
      lo = lo.cwiseMax((vlo.array() - margin).matrix());
      hi = hi.cwiseMin((vhi.array() + margin).matrix());
    }
    if (!std::isfinite(z_near)) z_near = std::max(cam.depth_min, 0.1);
    z_near = std::max(z_near, std::max(cam.depth_min, 0.05));
    const double spacing = z_near / (config.density * f);
    std::mt19937_64 rng(derive_seed(config.seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if ((hi - lo).minCoeff() > 0) {
      const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / spacing));
      const int ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / spacing));
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
          const Eigen::Vector3d local(lo.x() + (i + unit(rng)) * spacing, lo.y() + (j + unit(rng)) * spacing, 0);
          if (local.x() > hi.x() || local.y() > hi.y()) continue;
          splat(env * local, kEnvironmentLabel);
        }
    }
  }

  auto splat_primitive = [&](const Primitive& p, const Pose& pose, std::uint16_t lbl, std::uint64_t stream) {
    double z_near = std::numeric_limits<double>::infinity();
    const double r = p.shape == Shape::kBox ? 0.5 * std::hypot(p.size.x(), p.size.y()) : p.size.x();
    for (double z : {0.0, p.size.z()})
      for (int sx : {-1, 1})
        for (int sy : {-1, 1}) z_near = std::min(z_near, (pose * Eigen::Vector3d(sx * r, sy * r, z)).z());
    z_near = std::max(z_near, std::max(cam.depth_min, 0.05));
    std::mt19937_64 rng(derive_seed(config.seed, stream));
    // Back-facing samples never form the first hit of a ray; dropping them
    // keeps them from showing through sub-pixel gaps along silhouettes.
    for_each_surface_sample(p, z_near / (config.density * f), &rng,
                            [&](const Eigen::Vector3d& x, const Eigen::Vector3d& n) {
                              const Eigen::Vector3d q = pose * x;
                              if ((pose.linear() * n).dot(q) < 0) splat(q, lbl);
                            });
  };
  for (const auto& [prim, pose] : config.objects)
    splat_primitive(prim, pose, static_cast<std::uint16_t>(prim.id), 1000 + static_cast<std::uint64_t>(prim.id));
  for (std::size_t a = 0; a < config.arms.size(); ++a)
    splat_primitive(arm_primitive(static_cast<int>(a)), arm_frame(config.arms[a]), arm_label(static_cast<int>(a)),
                    100 + a);

  Rendering out;
  out.depth.assign(cells, 0.0f);
  std::vector<std::size_t> covered;
  for (std::size_t c = 0; c < cells; ++c)
    if (std::isfinite(best[c])) {
      covered.push_back(c);
      out.depth[c] = static_cast<float>(best[c]);
    }
  const auto n = static_cast<Eigen::Index>(covered.size());
  out.cloud.points.resize(n, 3);
  out.cloud.colors.resize(n, 3);
  out.cloud.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t c = covered[static_cast<std::size_t>(i)];
    out.cloud.points.row(i) = point[c].cast<float>().transpose();
    const auto col = color_of(label[c]);
    out.cloud.colors.row(i) << col[0], col[1], col[2];
    out.cloud.labels(i) = label[c];
  }
  return out;
}

PointCloud render_reference(const SceneConfiguration& config, const CameraModel& cam) {
  return render(config, cam).cloud;
}

namespace {

// Scripted world state while the demonstration is being recorded.
struct Recorder {
  const SceneSpec& spec;
  std::vector<Pose> objects;  // world poses
  std::vector<Pose> ee;       // world poses
  std::vector<float> grip;
  // held[a][k]: object k pose relative to arm a's end effector
  std::vector<std::map<int, Pose>> held;

  struct State {
    std::vector<Pose> objects, ee;
    std::vector<float> grip;
  };
  std::vector<State> frames;
  std::vector<Segment> segments;

  int index(int id) const {
    for (std::size_t k = 0; k < spec.objects.size(); ++k)
      if (spec.objects[k].id == id) return static_cast<int>(k);
    throw SpecError("script references unknown object " + std::to_string(id));
  }

  void snapshot() { frames.push_back({objects, ee, grip}); }

  void attach_follow() {
    for (std::size_t a = 0; a < held.size(); ++a)
      for (const auto& [k, rel] : held[a]) objects[static_cast<std::size_t>(k)] = ee[a] * rel;
  }

  // Moves every arm to its goal over n frames; held objects follow arm 0
  // when shared, otherwise their own arm.
  void move_arms(int n, const std::vector<Pose>& goal) {
    const std::vector<Pose> start = ee;
    for (int j = 1; j <= n; ++j) {
      for (std::size_t a = 0; a < ee.size(); ++a) ee[a] = lerp(start[a], goal[a], double(j) / n);
      attach_follow();
      snapshot();
    }
  }

  // Carries object k held by both arms to `goal` over n frames, keeping
  // the arms rigidly attached to it.
  void move_shared(int n, int k, const Pose& goal) {
    const Pose start = objects[static_cast<std::size_t>(k)];
    for (int j = 1; j <= n; ++j) {
      const Pose x = lerp(start, goal, double(j) / n);
      for (std::size_t a = 0; a < ee.size(); ++a) ee[a] = x * held[a].at(k).inverse();
      objects[static_cast<std::size_t>(k)] = x;
      snapshot();
    }
  }

  void set_grip(int arm, double width) {
    grip[static_cast<std::size_t>(arm)] = static_cast<float>(quantize_grip(width));
  }

  double top_of(int k) const {
    return objects[static_cast<std::size_t>(k)].translation().z() + spec.objects[static_cast<std::size_t>(k)].height();
  }

  double yaw_of(int k) const {
    const Eigen::Matrix3d r = objects[static_cast<std::size_t>(k)].linear();
    return std::atan2(r(1, 0), r(0, 0));
  }

  Pose grasp(int k, double lateral) const {
    const Primitive& p = spec.objects[static_cast<std::size_t>(k)];
    const double depth = std::min(0.02, p.height() / 2);
    const Pose& x = objects[static_cast<std::size_t>(k)];
    const Eigen::Vector3d at = x * Eigen::Vector3d(lateral, 0, p.height() - depth);
    return make_pose(ee_rotation(yaw_of(k)), at);
  }

  Pose place_target(const ScriptStep& st, int k) const {
    double z = 0;
    if (st.on) z = top_of(index(st.on));
    return world_pose({st.position.x(), st.position.y(), z}, st.yaw.value_or(yaw_of(k)));
  }

  IdSet held_ids(int arm) const {
    IdSet out;
    for (const auto& [k, rel] : held[static_cast<std::size_t>(arm)]) out.insert(spec.objects[static_cast<std::size_t>(k)].id);
    return out;
  }

  void open_segment(SegmentKind kind) {
    Segment s;
    s.kind = kind;
    s.start_frame = static_cast<int>(frames.size()) + 1;
    segments.push_back(s);
  }

  void close_segment() { segments.back().end_frame = static_cast<int>(frames.size()); }

  void fill_hands(Segment& s) const {
    if (spec.arms == 1) {
      s.hand = held_ids(0);
    } else {
      s.left_hand = held_ids(0);
      s.right_hand = held_ids(1);
    }
  }

  void run() {
    const int M = spec.motion_frames, S = spec.skill_frames;
    const double up = spec.approach_height;
    bool first = true;
    for (const ScriptStep& st : spec.script) {
      const int k = index(st.object);
      const bool bi = st.op == "bi_pick" || st.op == "bi_place";
      if (bi && spec.arms != 2) throw SpecError("bimanual step in a single-arm scene");
      if (!bi && (st.arm < 0 || st.arm >= spec.arms)) throw SpecError("script arm index out of range");
      if (!spec.objects[static_cast<std::size_t>(k)].rigid && (st.op == "pick" || bi))
        throw SpecError("scripted grasps require rigid objects");

      open_segment(SegmentKind::kMotion);
      if (first) {
        snapshot();
        first = false;
      }
      IdSet targets(st.targets.begin(), st.targets.end());
      if (st.op == "pick") {
        const Pose g = grasp(k, 0);
        std::vector<Pose> goal = ee;
        goal[static_cast<std::size_t>(st.arm)] = raised(g, up);
        move_arms(M, goal);
        close_segment();
        open_segment(SegmentKind::kSkill);
        targets.insert(st.object);
        segments.back().target = targets;
        fill_hands(segments.back());
        goal[static_cast<std::size_t>(st.arm)] = g;
        move_arms(S, goal);
        set_grip(st.arm, spec.closed_width);
        held[static_cast<std::size_t>(st.arm)][k] = ee[static_cast<std::size_t>(st.arm)].inverse() * objects[static_cast<std::size_t>(k)];
        snapshot();
        goal[static_cast<std::size_t>(st.arm)] = raised(g, up);
        move_arms(S, goal);
        close_segment();
      } else if (st.op == "place") {
        auto& hand = held[static_cast<std::size_t>(st.arm)];
        if (!hand.count(k)) throw SpecError("place of an object that is not held");
        if (st.on) targets.insert(st.on);
        const Pose x = place_target(st, k);
        const Pose g = x * hand.at(k).inverse();
        std::vector<Pose> goal = ee;
        goal[static_cast<std::size_t>(st.arm)] = raised(g, up);
        move_arms(M, goal);
        close_segment();
        open_segment(SegmentKind::kSkill);
        segments.back().target = targets;
        fill_hands(segments.back());
        goal[static_cast<std::size_t>(st.arm)] = g;
        move_arms(S, goal);
        objects[static_cast<std::size_t>(k)] = x;
        hand.erase(k);
        set_grip(st.arm, spec.open_width);
        snapshot();
        goal[static_cast<std::size_t>(st.arm)] = raised(g, up);
        move_arms(S, goal);
        close_segment();
      } else if (st.op == "bi_pick") {
        const Primitive& p = spec.objects[static_cast<std::size_t>(k)];
        const double lateral = p.shape == Shape::kBox ? p.size.x() / 2 - 0.01 : p.size.x() / 2;
        const Pose gl = grasp(k, -lateral), gr = grasp(k, lateral);
        move_arms(M, {raised(gl, up), raised(gr, up)});
        close_segment();
        open_segment(SegmentKind::kSkill);
        targets.insert(st.object);
        segments.back().target = targets;
        fill_hands(segments.back());
        move_arms(S, {gl, gr});
        for (int a = 0; a < 2; ++a) {
          set_grip(a, spec.closed_width);
          held[static_cast<std::size_t>(a)][k] = ee[static_cast<std::size_t>(a)].inverse() * objects[static_cast<std::size_t>(k)];
        }
        snapshot();
        move_shared(S, k, raised(objects[static_cast<std::size_t>(k)], up));
        close_segment();
      } else if (st.op == "bi_place") {
        if (!held[0].count(k) || !held[1].count(k)) throw SpecError("bi_place of an object not held by both arms");
        if (st.on) targets.insert(st.on);
        const Pose x = place_target(st, k);
        move_shared(M, k, raised(x, up));
        close_segment();
        open_segment(SegmentKind::kSkill);
        segments.back().target = targets;
        fill_hands(segments.back());
        move_shared(S, k, x);
        for (int a = 0; a < 2; ++a) {
          held[static_cast<std::size_t>(a)].erase(k);
          set_grip(a, spec.open_width);
        }
        snapshot();
        std::vector<Pose> goal = ee;
        for (auto& g : goal) g = raised(g, up);
        move_arms(S, goal);
        close_segment();
      } else {
        throw SpecError("unknown script op '" + st.op + "'");
      }
    }
  }
};

}  // namespace

SynthScene make_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.camera.validate();
  if (spec.script.empty()) throw SpecError("scene script is empty");
  if (static_cast<int>(spec.home.size()) != spec.arms) throw SpecError("one home position per arm required");
  if (spec.placements.size() != spec.objects.size()) throw SpecError("one placement per object required");
  for (std::size_t a = 0; a < spec.objects.size(); ++a)
    for (std::size_t b = a + 1; b < spec.objects.size(); ++b) {
      if (spec.objects[a].id == spec.objects[b].id) throw SpecError("duplicate object id");
      if (polygon_distance(footprint(spec.objects[a], spec.placements[a]),
                           footprint(spec.objects[b], spec.placements[b])) <= 0)
        throw SpecError("objects " + std::to_string(spec.objects[a].id) + " and " +
                        std::to_string(spec.objects[b].id) + " overlap");
    }
  for (const Primitive& p : spec.objects)
    if (p.id < 1 || p.id >= kArmLabelBase) throw SpecError("object ids must be positive");

  Recorder rec{spec, {}, {}, {}, {}, {}, {}};
  for (std::size_t k = 0; k < spec.objects.size(); ++k)
    rec.objects.push_back(world_pose({spec.placements[k].x(), spec.placements[k].y(), 0}, spec.placements[k].z()));
  for (const auto& h : spec.home) rec.ee.push_back(make_pose(ee_rotation(0), h));
  rec.grip.assign(static_cast<std::size_t>(spec.arms), static_cast<float>(quantize_grip(spec.open_width)));
  rec.held.resize(static_cast<std::size_t>(spec.arms));
  rec.run();

  const Pose cw = spec.camera_from_world();
  SceneConfiguration base;
  base.environment = cw;
  base.table_half_extent = spec.table_half_extent;
  base.density = spec.density;
  base.seed = seed;

  SynthScene out;
  out.demo.camera = spec.camera;
  out.demo.arm_count = spec.arms;
  out.tracking.environment = render(base, spec.camera).cloud;
  out.tracking.environment.labels.resize(0);
  for (const Primitive& p : spec.objects) out.tracking.templates.push_back({p.id, sample_primitive(p, spec.template_spacing), p.rigid});

  const std::size_t K = spec.objects.size();
  for (const auto& state : rec.frames) {
    SceneConfiguration cfg = base;
    std::vector<Pose> poses;
    for (std::size_t k = 0; k < K; ++k) {
      poses.push_back(cw * state.objects[k]);
      cfg.objects.emplace_back(spec.objects[k], poses.back());
    }
    for (const Pose& e : state.ee) cfg.arms.push_back(cw * e);
    Rendering r = render(cfg, spec.camera);

    std::vector<std::optional<Pose>> tracked(K);
    std::vector<PointCloud> nonrigid(K);
    for (std::size_t k = 0; k < K; ++k) {
      if (spec.objects[k].rigid) {
        tracked[k] = poses[k];
      } else {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < r.cloud.size(); ++i)
          if (r.cloud.labels(i) == spec.objects[k].id) rows.push_back(i);
        nonrigid[k] = select(r.cloud, rows);
      }
    }
    out.tracking.poses.push_back(std::move(tracked));
    out.tracking.nonrigid.push_back(std::move(nonrigid));
    out.object_poses.push_back(poses);

    Frame f;
    f.observation = std::move(r.cloud);
    f.observation.labels.resize(0);
    for (int a = 0; a < spec.arms; ++a) {
      f.action.ee.push_back(cfg.arms[static_cast<std::size_t>(a)]);
      f.action.grip.push_back(state.grip[static_cast<std::size_t>(a)]);
    }
    out.demo.frames.push_back(std::move(f));
    out.depth.push_back(std::move(r.depth));
  }

  out.annotation = make_annotation(spec.arms, rec.segments);
  out.annotation.mask_files.push_back("mask_gripper.png");
  for (const Primitive& p : spec.objects) out.annotation.mask_files.push_back("mask_obj" + std::to_string(p.id) + ".png");
  return out;
}

namespace {

SceneSpec base_spec(int arms) {
  SceneSpec s;
  s.arms = arms;
  if (arms == 1) {
    s.home = {{0.0, -0.15, 0.3}};
  } else {
    s.home = {{-0.2, -0.15, 0.3}, {0.2, -0.15, 0.3}};
  }
  return s;
}

ScriptStep step(const std::string& op, int object) {
  ScriptStep s;
  s.op = op;
  s.object = object;
  return s;
}

Primitive box(int id, double sx, double sy, double sz) {
  return {id, Shape::kBox, {sx, sy, sz}, true};
}

}  // namespace

SceneSpec example_pick_place_spec() {
  SceneSpec s = base_spec(1);
  s.objects = {box(1, 0.05, 0.05, 0.05), {2, Shape::kCylinder, {0.05, 0.05, 0.02}, true}, box(3, 0.06, 0.04, 0.08)};
  s.placements = {{-0.1, 0.0, 0.3}, {0.1, 0.05, 0.0}, {0.0, 0.15, 0.0}};
  ScriptStep pick = step("pick", 1);
  ScriptStep place = step("place", 1);
  place.position = {0.1, 0.05};
  place.on = 2;
  s.script = {pick, place};
  return s;
}

SceneSpec example_bridge_spec() {
  SceneSpec s = base_spec(1);
  s.objects = {box(1, 0.04, 0.04, 0.06), box(2, 0.04, 0.04, 0.06), box(3, 0.16, 0.04, 0.015)};
  s.placements = {{-0.15, -0.05, 0.0}, {0.06, 0.08, 0.0}, {-0.05, 0.18, 0.0}};
  ScriptStep pick1 = step("pick", 1);
  ScriptStep place1 = step("place", 1);
  place1.position = {-0.06, 0.08};
  ScriptStep pick3 = step("pick", 3);
  ScriptStep place3 = step("place", 3);
  place3.position = {0.0, 0.08};
  place3.on = 1;
  place3.targets = {2};
  s.script = {pick1, place1, pick3, place3};
  return s;
}

SceneSpec example_bimanual_spec() {
  SceneSpec s = base_spec(2);
  s.objects = {box(1, 0.2, 0.06, 0.06), {2, Shape::kCylinder, {0.06, 0.06, 0.03}, true}};
  s.placements = {{0.0, -0.02, 0.0}, {0.02, 0.16, 0.0}};
  ScriptStep pick = step("bi_pick", 1);
  ScriptStep place = step("bi_place", 1);
  place.position = {0.0, 0.16};
  place.on = 2;
  s.script = {pick, place};
  return s;
}

}  // namespace pcdgen
