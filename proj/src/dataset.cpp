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

#include "pcdgen/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>

#include "pcdgen/container_io.hpp"
#include "pcdgen/errors.hpp"
#include "pcdgen/parallel.hpp"

namespace pcdgen {

namespace {

using json = nlohmann::json;

std::string numbered(const char* fmt, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, index);
  return buf;
}

std::vector<int> ids_of(const ParsedScene& scene) {
  std::vector<int> ids;
  for (const auto& t : scene.templates) ids.push_back(t.id);
  return ids;
}

std::set<std::uint16_t> bypass_of(const DatasetInfo& info, bool enabled) {
  return enabled ? info.nonrigid_ids : std::set<std::uint16_t>{};
}

void clear_outputs(const fs::path& out) {
  if (!fs::exists(out)) return;
  for (const auto& entry : fs::directory_iterator(out)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("gen_", 0) == 0 || name.rfind("plan_", 0) == 0 || name == "dataset.json")
      fs::remove_all(entry.path());
  }
}

}  // namespace

json dataset_info_to_json(const DatasetInfo& info) {
  json sources = json::array();
  for (const auto& s : info.sources)
    sources.push_back({{"scene", s.scene.string()}, {"annotation", s.annotation.string()}});
  json j = {{"seed", info.seed},
            {"config", config_to_json(info.config)},
            {"sources", sources},
            {"nonrigid_ids", info.nonrigid_ids},
            {"requested", info.requested},
            {"produced", info.produced},
            {"warnings", info.warnings}};
  if (info.effective_camera) j["effective_camera"] = camera_to_json(*info.effective_camera);
  return j;
}

DatasetInfo dataset_info_from_json(const json& j) {
  try {
    DatasetInfo info;
    info.seed = j.at("seed").get<std::uint64_t>();
    info.config = config_from_json(j.at("config"));
    for (const json& s : j.at("sources"))
      info.sources.push_back({s.at("scene").get<std::string>(), s.at("annotation").get<std::string>()});
    info.nonrigid_ids = j.value("nonrigid_ids", std::set<std::uint16_t>{});
    info.requested = j.at("requested").get<std::size_t>();
    info.produced = j.at("produced").get<std::size_t>();
    info.warnings = j.value("warnings", std::vector<std::string>{});
    if (j.contains("effective_camera")) info.effective_camera = camera_from_json(j["effective_camera"]);
    return info;
  } catch (const json::exception& e) {
    throw MalformedContainer(std::string("dataset.json: ") + e.what());
  }
}

DatasetInfo read_dataset_info(const fs::path& root) { return dataset_info_from_json(read_json(root / "dataset.json")); }

std::string demo_name(std::size_t index) { return numbered("gen_%06zu", index); }
std::string plan_name(std::size_t index) { return numbered("plan_%06zu.json", index); }

void write_generated(const GeneratedDemo& demo, const std::vector<int>& object_ids, const fs::path& root,
                     const std::optional<CameraModel>& effective_camera) {
  const fs::path dir = root / demo_name(demo.index);
  save_demonstration(demo.demo, dir, effective_camera);
  write_annotation(demo.annotation, dir / "annotation.json");
  write_json({{"index", demo.index},
              {"replay", demo.replay},
              {"combination", demo.combination},
              {"perturbation", demo.perturbation},
              {"source", demo.source},
              {"plan", plan_name(demo.index)},
              {"source_frames", demo.source_frames}},
             dir / "generation.json");
  for (std::size_t k = 0; k < object_ids.size(); ++k) {
    std::vector<Eigen::Matrix4d> mats;
    mats.reserve(demo.object_poses.size());
    for (const auto& frame : demo.object_poses) mats.push_back(frame[k].matrix());
    write_matrices(mats, dir / "poses" / ("obj_" + std::to_string(object_ids[k]) + ".bin"));
  }
  write_json(plan_to_json(demo.plan), root / plan_name(demo.index));
}

GeneratedRecord read_generated(const fs::path& root, const std::string& name, const std::vector<int>& object_ids) {
  GeneratedRecord r;
  r.name = name;
  const fs::path dir = root / name;
  r.demo = load_demonstration(dir, &r.effective_camera);
  r.generation = read_json(dir / "generation.json");
  try {
    r.source_frames = r.generation.at("source_frames").get<std::vector<int>>();
    r.source = r.generation.at("source").get<int>();
    r.plan = plan_from_json(read_json(root / r.generation.at("plan").get<std::string>()));
  } catch (const json::exception& e) {
    throw MalformedContainer(name + "/generation.json: " + e.what());
  }
  r.annotation = parse_annotation(dir / "annotation.json", static_cast<int>(object_ids.size()), r.demo.horizon());
  r.object_poses.assign(static_cast<std::size_t>(r.demo.horizon()), std::vector<Pose>(object_ids.size()));
  for (std::size_t k = 0; k < object_ids.size(); ++k) {
    const auto mats = read_matrices(dir / "poses" / ("obj_" + std::to_string(object_ids[k]) + ".bin"));
    if (static_cast<int>(mats.size()) != r.demo.horizon())
      throw MalformedContainer(name + ": pose track of object " + std::to_string(object_ids[k]) + " has " +
                               std::to_string(mats.size()) + " frames");
    for (std::size_t t = 0; t < mats.size(); ++t) r.object_poses[t][k].matrix() = mats[t];
  }
  return r;
}

std::vector<std::string> list_generated(const fs::path& root) {
  std::vector<std::string> names;
  if (!fs::is_directory(root)) throw IoFailure(root.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && name.rfind("gen_", 0) == 0) names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

Demonstration process_demo(const Demonstration& demo, const ProcessorConfig& cfg, const PixelRect& rect,
                           CameraModel* effective_camera) {
  Demonstration out = demo;
  CameraModel cam = demo.camera;
  for (Frame& f : out.frames) {
    ProcessedFrame p = process_frame(f.observation, demo.camera, cfg, rect);
    f.observation = std::move(p.cloud);
    cam = p.camera;
  }
  if (effective_camera) *effective_camera = cfg.fill == FillMode::kShrink ? shrink_camera(demo.camera, rect, cfg) : cam;
  return out;
}

CoverageMask demo_coverage(const Demonstration& demo, const ProcessorConfig& cfg) {
  CoverageMask all;
  for (std::size_t t = 0; t < demo.frames.size(); ++t) {
    CoverageMask m = environment_coverage(demo.frames[t].observation, demo.camera, cfg);
    all = t == 0 ? std::move(m) : intersect(all, m);
  }
  return all;
}

LoadedSource load_source(const DatasetSource& source, const AnnotationOptions& options) {
  LoadedSource s;
  s.scene = load_parsed_scene(source.scene);
  s.annotation = parse_annotation(source.annotation, s.scene.object_count(), s.scene.demo.horizon(), options);
  return s;
}

DatasetInfo run_generate(const GenerateRequest& req) {
  req.config.validate();
  if (req.sources.empty()) throw ConfigError("at least one source scene is required");
  std::vector<std::unique_ptr<LoadedSource>> loaded;
  std::vector<std::unique_ptr<AugmentContext>> contexts;
  std::vector<const AugmentContext*> ptrs;
  DatasetInfo info;
  info.seed = req.seed;
  info.config = req.config;
  std::vector<int> ids;
  for (const DatasetSource& s : req.sources) {
    DatasetSource abs{fs::absolute(s.scene), fs::absolute(s.annotation)};
    info.sources.push_back(abs);
    loaded.push_back(std::make_unique<LoadedSource>(load_source(abs)));
    const std::vector<int> these = ids_of(loaded.back()->scene);
    if (ids.empty()) ids = these;
    else if (ids != these) throw ConfigError("source scenes must share the same object ids");
    if (loaded.back()->scene.demo.camera != loaded.front()->scene.demo.camera)
      throw ConfigError("source scenes must share one camera");
    for (const auto& t : loaded.back()->scene.templates)
      if (!t.rigid) info.nonrigid_ids.insert(static_cast<std::uint16_t>(t.id));
    contexts.push_back(std::make_unique<AugmentContext>(loaded.back()->scene, loaded.back()->annotation));
    ptrs.push_back(contexts.back().get());
  }

  const BatchPlan batch = plan_batch(ptrs, req.config.sampler, req.seed, req.jobs);
  info.requested = batch.requested;
  info.produced = batch.tuples.size();
  info.warnings = batch.warnings;

  fs::create_directories(req.out);
  clear_outputs(req.out);
  const int jobs = resolve_jobs(req.jobs);
  const int n = static_cast<int>(batch.tuples.size());
  const SamplerConfig& sampler = req.config.sampler;

  if (!req.camera_aware) {
    parallel_for(n, jobs, [&](int i) {
      write_generated(materialize(ptrs, batch.tuples[static_cast<std::size_t>(i)], sampler), ids, req.out);
    });
  } else {
    ProcessorConfig pc = req.config.processing;
    pc.bypass_labels = bypass_of(info, req.config.bypass_nonrigid);
    const CameraModel& cam = loaded.front()->scene.demo.camera;
    PixelRect rect{0, 0, cam.width, cam.height};
    if (pc.fill == FillMode::kShrink) {
      std::vector<CoverageMask> masks(static_cast<std::size_t>(n));
      parallel_for(n, jobs, [&](int i) {
        masks[static_cast<std::size_t>(i)] =
            demo_coverage(materialize(ptrs, batch.tuples[static_cast<std::size_t>(i)], sampler).demo, pc);
      });
      rect = dataset_rectangle(masks, cam, pc);
    }
    info.effective_camera = pc.fill == FillMode::kShrink ? shrink_camera(cam, rect, pc) : cam;
    parallel_for(n, jobs, [&](int i) {
      GeneratedDemo d = materialize(ptrs, batch.tuples[static_cast<std::size_t>(i)], sampler);
      d.demo = process_demo(d.demo, pc, rect, nullptr);
      write_generated(d, ids, req.out, info.effective_camera);
    });
  }
  write_json(dataset_info_to_json(info), req.out / "dataset.json");
  return info;
}

DatasetInfo process_dataset(const fs::path& in, const fs::path& out, const ProcessorConfig& cfg,
                            bool bypass_nonrigid, int jobs) {
  cfg.validate();
  if (fs::exists(out) && fs::equivalent(in, out)) throw ConfigError("process needs distinct input and output directories");
  DatasetInfo info = read_dataset_info(in);
  if (info.effective_camera) throw ConfigError(in.string() + " is already camera-processed");
  const auto names = list_generated(in);
  ProcessorConfig pc = cfg;
  pc.bypass_labels = bypass_of(info, bypass_nonrigid);
  jobs = resolve_jobs(jobs);
  const int n = static_cast<int>(names.size());
  if (n == 0) throw MalformedContainer(in.string() + " holds no generated demonstrations");

  std::vector<CameraModel> cams(static_cast<std::size_t>(n));
  std::vector<CoverageMask> masks(static_cast<std::size_t>(n));
  parallel_for(n, jobs, [&](int i) {
    const Demonstration d = load_demonstration(in / names[static_cast<std::size_t>(i)]);
    cams[static_cast<std::size_t>(i)] = d.camera;
    if (pc.fill == FillMode::kShrink) masks[static_cast<std::size_t>(i)] = demo_coverage(d, pc);
  });
  for (const CameraModel& c : cams)
    if (c != cams.front()) throw ConfigError("generated demonstrations use different cameras");
  const CameraModel& cam = cams.front();
  PixelRect rect{0, 0, cam.width, cam.height};
  if (pc.fill == FillMode::kShrink) rect = dataset_rectangle(masks, cam, pc);
  info.effective_camera = pc.fill == FillMode::kShrink ? shrink_camera(cam, rect, pc) : cam;
  info.config.processing = cfg;
  info.config.bypass_nonrigid = bypass_nonrigid;

  fs::create_directories(out);
  clear_outputs(out);
  parallel_for(n, jobs, [&](int i) {
    const std::string& name = names[static_cast<std::size_t>(i)];
    const Demonstration d = process_demo(load_demonstration(in / name), pc, rect, nullptr);
    save_demonstration(d, out / name, info.effective_camera);
    for (const char* file : {"annotation.json", "generation.json"})
      fs::copy_file(in / name / file, out / name / file, fs::copy_options::overwrite_existing);
    fs::copy(in / name / "poses", out / name / "poses",
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    const std::string plan = read_json(in / name / "generation.json").at("plan").get<std::string>();
    fs::copy_file(in / plan, out / plan, fs::copy_options::overwrite_existing);
  });
  write_json(dataset_info_to_json(info), out / "dataset.json");
  return info;
}

}  // namespace pcdgen
