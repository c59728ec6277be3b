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

#include "pcdgen/container_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "pcdgen/errors.hpp"

namespace pcdgen {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace {

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedContainer("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoFailure("write failed for " + path.string());
}

std::string frame_name(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.pcd-bin", frame);
  return buf;
}

std::string object_name(int id, const char* ext) {
  return "obj_" + std::to_string(id) + ext;
}

nlohmann::json objects_to_json(std::span<const ObjectTemplate> templates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ObjectTemplate& t : templates) arr.push_back({{"id", t.id}, {"rigid", t.rigid}});
  return arr;
}

std::vector<ObjectTemplate> templates_from_json(const nlohmann::json& arr, const fs::path& dir) {
  std::vector<ObjectTemplate> out;
  for (const auto& o : arr) {
    ObjectTemplate t;
    t.id = o.at("id").get<int>();
    t.rigid = o.value("rigid", true);
    if (t.id < 1) throw MalformedContainer("object ids start at 1");
    for (const ObjectTemplate& seen : out)
      if (seen.id == t.id) throw MalformedContainer("duplicate object id " + std::to_string(t.id));
    t.cloud = read_cloud(dir / "templates" / object_name(t.id, ".pcd-bin"));
    out.push_back(std::move(t));
  }
  return out;
}

void write_templates(std::span<const ObjectTemplate> templates, const fs::path& dir) {
  for (const ObjectTemplate& t : templates)
    write_cloud(t.cloud, dir / "templates" / object_name(t.id, ".pcd-bin"));
}

}  // namespace

PointCloud read_cloud(const fs::path& path) {
  const std::vector<char> bytes = read_bytes(path);
  if (bytes.size() < 4) throw MalformedContainer("truncated cloud " + path.string());
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data(), 4);
  const std::size_t xyz = std::size_t{n} * 12;
  if (bytes.size() < 4 + xyz) throw MalformedContainer("truncated cloud " + path.string());
  PointCloud cloud;
  cloud.points.resize(n, 3);
  std::memcpy(cloud.points.data(), bytes.data() + 4, xyz);
  const std::size_t rest = bytes.size() - 4 - xyz;
  const char* p = bytes.data() + 4 + xyz;
  if (n == 0 && rest != 0) throw MalformedContainer("trailing bytes in " + path.string());
  if (n > 0) {
    const std::size_t rgb = std::size_t{n} * 3, lab = std::size_t{n} * 2;
    if (rest == rgb || rest == rgb + lab) {
      cloud.colors.resize(n, 3);
      std::memcpy(cloud.colors.data(), p, rgb);
      p += rgb;
    }
    if (rest == lab || rest == rgb + lab) {
      cloud.labels.resize(n);
      std::memcpy(cloud.labels.data(), p, lab);
    } else if (rest != 0 && rest != rgb) {
      throw MalformedContainer("unexpected channel size in " + path.string());
    }
  }
  return cloud;
}

void write_cloud(const PointCloud& cloud, const fs::path& path) {
  std::ofstream out = open_out(path);
  const auto n = static_cast<std::uint32_t>(cloud.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(cloud.points.data()), std::streamsize{n} * 12);
  if (cloud.has_colors())
    out.write(reinterpret_cast<const char*>(cloud.colors.data()), std::streamsize{n} * 3);
  if (cloud.has_labels())
    out.write(reinterpret_cast<const char*>(cloud.labels.data()), std::streamsize{n} * 2);
  finish(out, path);
}

std::vector<Eigen::Matrix4d> read_matrices(const fs::path& path) {
  const std::vector<char> bytes = read_bytes(path);
  if (bytes.size() % 128 != 0) throw MalformedContainer("truncated pose file " + path.string());
  std::vector<Eigen::Matrix4d> out(bytes.size() / 128);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Eigen::Matrix<double, 4, 4, Eigen::RowMajor> m;
    std::memcpy(m.data(), bytes.data() + i * 128, 128);
    out[i] = m;
  }
  return out;
}

void write_matrices(std::span<const Eigen::Matrix4d> mats, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (const Eigen::Matrix4d& m : mats) {
    const Eigen::Matrix<double, 4, 4, Eigen::RowMajor> rm = m;
    out.write(reinterpret_cast<const char*>(rm.data()), 128);
  }
  finish(out, path);
}

nlohmann::json camera_to_json(const CameraModel& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
          {"width", c.width}, {"height", c.height},
          {"depth_min", c.depth_min}, {"depth_max", c.depth_max}};
}

CameraModel camera_from_json(const nlohmann::json& j) {
  CameraModel c;
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.depth_min = j.at("depth_min").get<double>();
  c.depth_max = j.at("depth_max").get<double>();
  return c;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedContainer("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedContainer(path.string() + ": " + e.what());
  }
}

Demonstration load_demonstration(const fs::path& dir, std::optional<CameraModel>* effective_camera) {
  Demonstration demo;
  int horizon = 0;
  try {
    const nlohmann::json meta = read_json(dir / "meta.json");
    if (meta.at("format_version").get<std::string>() != kFormatVersion)
      throw MalformedContainer("unsupported container version in " + dir.string());
    demo.camera = camera_from_json(meta.at("camera"));
    demo.arm_count = meta.at("arm_count").get<int>();
    horizon = meta.at("horizon").get<int>();
    if (effective_camera) {
      *effective_camera = meta.contains("effective_camera")
                              ? std::optional(camera_from_json(meta["effective_camera"]))
                              : std::nullopt;
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedContainer(dir.string() + "/meta.json: " + e.what());
  }
  if (horizon < 0 || (demo.arm_count != 1 && demo.arm_count != 2))
    throw MalformedContainer("bad horizon or arm count in " + dir.string());

  const std::vector<char> actions = read_bytes(dir / "actions.bin");
  const std::size_t per_arm = 16 * 8 + 4;
  const std::size_t per_frame = per_arm * static_cast<std::size_t>(demo.arm_count);
  if (actions.size() != per_frame * static_cast<std::size_t>(horizon))
    throw MalformedContainer("actions.bin size does not match horizon");

  demo.frames.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    Frame& f = demo.frames[static_cast<std::size_t>(t)];
    f.observation = read_cloud(dir / "frames" / frame_name(t + 1));
    const char* p = actions.data() + per_frame * static_cast<std::size_t>(t);
    for (int a = 0; a < demo.arm_count; ++a) {
      Eigen::Matrix<double, 4, 4, Eigen::RowMajor> m;
      std::memcpy(m.data(), p, 128);
      float grip = 0;
      std::memcpy(&grip, p + 128, 4);
      p += per_arm;
      if (!is_valid_pose(m)) throw InvariantViolation("end-effector pose is not rigid", t + 1);
      Pose pose;
      pose.matrix() = m;
      f.action.ee.push_back(pose);
      f.action.grip.push_back(grip);
    }
  }
  demo.validate();
  return demo;
}

void save_demonstration(const Demonstration& demo, const fs::path& dir,
                        const std::optional<CameraModel>& effective_camera) {
  nlohmann::json meta = {{"format_version", kFormatVersion},
                         {"camera", camera_to_json(demo.camera)},
                         {"arm_count", demo.arm_count},
                         {"horizon", demo.horizon()}};
  if (effective_camera) meta["effective_camera"] = camera_to_json(*effective_camera);
  write_json(meta, dir / "meta.json");
  for (int t = 0; t < demo.horizon(); ++t)
    write_cloud(demo.frames[static_cast<std::size_t>(t)].observation,
                dir / "frames" / frame_name(t + 1));
  std::ofstream out = open_out(dir / "actions.bin");
  for (const Frame& f : demo.frames) {
    for (int a = 0; a < demo.arm_count; ++a) {
      const Eigen::Matrix<double, 4, 4, Eigen::RowMajor> m = f.action.ee[static_cast<std::size_t>(a)].matrix();
      out.write(reinterpret_cast<const char*>(m.data()), 128);
      out.write(reinterpret_cast<const char*>(&f.action.grip[static_cast<std::size_t>(a)]), 4);
    }
  }
  finish(out, dir / "actions.bin");
}

ParsedScene load_parsed_scene(const fs::path& dir) {
  ParsedScene scene;
  scene.demo = load_demonstration(dir);
  const nlohmann::json meta = read_json(dir / "meta.json");
  scene.templates = templates_from_json(meta.value("objects", nlohmann::json::array()), dir);
  scene.environment = read_cloud(dir / "environment.pcd-bin");
  const int horizon = scene.demo.horizon();
  const std::size_t k_count = scene.templates.size();
  scene.object_poses.assign(static_cast<std::size_t>(horizon), std::vector<Pose>(k_count, Pose::Identity()));
  scene.nonrigid_clouds.assign(static_cast<std::size_t>(horizon), std::vector<PointCloud>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    const ObjectTemplate& tpl = scene.templates[k];
    if (tpl.rigid) {
      const auto mats = read_matrices(dir / "poses" / object_name(tpl.id, ".bin"));
      if (static_cast<int>(mats.size()) != horizon)
        throw MalformedContainer("pose count mismatch for object " + std::to_string(tpl.id));
      for (int t = 0; t < horizon; ++t) {
        if (!is_valid_pose(mats[static_cast<std::size_t>(t)]))
          throw InvariantViolation("object pose is not rigid", t + 1);
        scene.object_poses[static_cast<std::size_t>(t)][k].matrix() = mats[static_cast<std::size_t>(t)];
      }
    } else {
      for (int t = 0; t < horizon; ++t)
        scene.nonrigid_clouds[static_cast<std::size_t>(t)][k] =
            read_cloud(dir / "nonrigid" / ("obj_" + std::to_string(tpl.id)) / frame_name(t + 1));
    }
  }
  scene.arm.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t)
    scene.arm[static_cast<std::size_t>(t)] = read_cloud(dir / "arm" / frame_name(t + 1));
  return scene;
}

void save_parsed_scene(const ParsedScene& scene, const fs::path& dir) {
  save_demonstration(scene.demo, dir);
  nlohmann::json meta = read_json(dir / "meta.json");
  meta["objects"] = objects_to_json(scene.templates);
  write_json(meta, dir / "meta.json");
  write_cloud(scene.environment, dir / "environment.pcd-bin");
  write_templates(scene.templates, dir);
  const int horizon = scene.demo.horizon();
  for (std::size_t k = 0; k < scene.templates.size(); ++k) {
    const ObjectTemplate& tpl = scene.templates[k];
    if (tpl.rigid) {
      std::vector<Eigen::Matrix4d> mats;
      for (int t = 0; t < horizon; ++t) mats.push_back(scene.object_poses[static_cast<std::size_t>(t)][k].matrix());
      write_matrices(mats, dir / "poses" / object_name(tpl.id, ".bin"));
    } else {
      for (int t = 0; t < horizon; ++t)
        write_cloud(scene.nonrigid_clouds[static_cast<std::size_t>(t)][k],
                    dir / "nonrigid" / ("obj_" + std::to_string(tpl.id)) / frame_name(t + 1));
    }
  }
  for (int t = 0; t < horizon; ++t)
    write_cloud(scene.arm[static_cast<std::size_t>(t)], dir / "arm" / frame_name(t + 1));
}

TrackingInput load_tracking(const fs::path& dir, int horizon) {
  TrackingInput tr;
  tr.templates = templates_from_json(read_json(dir / "objects.json"), dir);
  tr.environment = read_cloud(dir / "environment.pcd-bin");
  const std::size_t k_count = tr.templates.size();
  tr.poses.assign(static_cast<std::size_t>(horizon), std::vector<std::optional<Pose>>(k_count));
  tr.nonrigid.assign(static_cast<std::size_t>(horizon), std::vector<PointCloud>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    const ObjectTemplate& tpl = tr.templates[k];
    if (tpl.rigid) {
      const fs::path path = dir / "poses" / object_name(tpl.id, ".bin");
      const auto mats = fs::exists(path) ? read_matrices(path) : std::vector<Eigen::Matrix4d>{};
      for (int t = 0; t < horizon && t < static_cast<int>(mats.size()); ++t) {
        const Eigen::Matrix4d& m = mats[static_cast<std::size_t>(t)];
        if (m.hasNaN()) continue;
        if (!is_valid_pose(m)) throw InvariantViolation("tracked pose is not rigid", t + 1);
        Pose p;
        p.matrix() = m;
        tr.poses[static_cast<std::size_t>(t)][k] = p;
      }
    } else {
      for (int t = 0; t < horizon; ++t) {
        const fs::path path = dir / "nonrigid" / ("obj_" + std::to_string(tpl.id)) / frame_name(t + 1);
        if (fs::exists(path)) tr.nonrigid[static_cast<std::size_t>(t)][k] = read_cloud(path);
      }
    }
  }
  return tr;
}

void save_tracking(const TrackingInput& tr, const fs::path& dir) {
  write_json(objects_to_json(tr.templates), dir / "objects.json");
  write_templates(tr.templates, dir);
  write_cloud(tr.environment, dir / "environment.pcd-bin");
  for (std::size_t k = 0; k < tr.templates.size(); ++k) {
    const ObjectTemplate& tpl = tr.templates[k];
    if (tpl.rigid) {
      std::vector<Eigen::Matrix4d> mats;
      for (const auto& frame : tr.poses)
        mats.push_back(frame[k] ? frame[k]->matrix()
                                : Eigen::Matrix4d::Constant(std::numeric_limits<double>::quiet_NaN()));
      write_matrices(mats, dir / "poses" / object_name(tpl.id, ".bin"));
    } else {
      for (std::size_t t = 0; t < tr.nonrigid.size(); ++t)
        write_cloud(tr.nonrigid[t][k], dir / "nonrigid" / ("obj_" + std::to_string(tpl.id)) /
                                           frame_name(static_cast<int>(t) + 1));
    }
  }
}

}  // namespace pcdgen
