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

// pcdgen: synth, parse, annotate, generate, process, validate, inspect.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 any other
// pipeline error.

#include <algorithm>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcdgen/annotation.hpp"
#include "pcdgen/annotation_service.hpp"
#include "pcdgen/camera_processor.hpp"
#include "pcdgen/config.hpp"
#include "pcdgen/container_io.hpp"
#include "pcdgen/dataset.hpp"
#include "pcdgen/errors.hpp"
#include "pcdgen/parallel.hpp"
#include "pcdgen/scene_parser.hpp"
#include "pcdgen/synth.hpp"
#include "pcdgen/validate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pcdgen;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct Globals {
  int jobs = 0;
  bool print_config = false;
};

PipelineConfig pipeline_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

void echo(const json& j) { std::cout << j.dump() << "\n"; }

AnnotationService* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}

// 8-bit binary PGM of a depth image; near is bright, empty pixels are black.
void write_pgm(const std::vector<float>& depth, const CameraModel& cam, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << "P5\n" << cam.width << " " << cam.height << "\n255\n";
  const double lo = cam.depth_min, hi = cam.depth_max;
  for (float d : depth) {
    unsigned char v = 0;
    if (d > 0) v = static_cast<unsigned char>(1 + 254 * std::clamp((hi - d) / (hi - lo), 0.0, 1.0));
    out.put(static_cast<char>(v));
  }
  if (!out) throw IoFailure("cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud demonstration generation toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--jobs", g.jobs, "worker threads (default: PCDGEN_JOBS or 1)")->check(CLI::NonNegativeNumber);
  app.add_flag("--print-config", g.print_config, "print the resolved configuration and exit");

  // synth
  auto* synth = app.add_subcommand("synth", "render a synthetic demonstration with tracking and annotation");
  std::string spec_path, builtin, synth_out;
  std::uint64_t synth_seed = 0;
  auto* spec_opt = synth->add_option("--spec", spec_path, "scene spec JSON")->check(CLI::ExistingFile);
  synth->add_option("--builtin", builtin, "built-in scene")
      ->check(CLI::IsMember({"pick_place", "bridge", "bimanual"}))
      ->excludes(spec_opt);
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--seed", synth_seed);

  // parse
  auto* parse = app.add_subcommand("parse", "split a demonstration into environment, objects and arm");
  std::string parse_demo, parse_tracking, parse_out, parse_config;
  std::optional<double> parse_eps;
  parse->add_option("--demo", parse_demo)->required()->check(CLI::ExistingDirectory);
  parse->add_option("--tracking", parse_tracking)->required()->check(CLI::ExistingDirectory);
  parse->add_option("--out", parse_out)->required();
  parse->add_option("--config", parse_config)->check(CLI::ExistingFile);
  parse->add_option("--eps", parse_eps, "set-difference tolerance in meters");

  // annotate
  auto* annotate = app.add_subcommand("annotate", "serve the annotation API for a frame directory");
  std::string ann_frames, ann_out, ann_ui, ann_host = "127.0.0.1";
  int ann_port = 8080, ann_objects = -1;
  annotate->add_option("--frames", ann_frames)->required()->check(CLI::ExistingDirectory);
  annotate->add_option("--out", ann_out)->required();
  annotate->add_option("--port", ann_port)->check(CLI::Range(0, 65535));
  annotate->add_option("--host", ann_host);
  annotate->add_option("--objects", ann_objects, "object count K (default: inferred from the mask list)");
  annotate->add_option("--ui", ann_ui, "static UI bundle served at /")->check(CLI::ExistingDirectory);

  // generate
  auto* gen = app.add_subcommand("generate", "generate augmented demonstrations");
  std::vector<std::string> gen_scenes, gen_annotations;
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  bool camera_aware = true;
  gen->add_option("--scene", gen_scenes, "parsed scene directory (repeatable)")->required()->check(CLI::ExistingDirectory);
  gen->add_option("--annotation", gen_annotations, "annotation file, one per --scene")->required()->check(CLI::ExistingFile);
  gen->add_option("--config", gen_config)->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--seed", gen_seed);
  gen->add_option("--camera-aware", camera_aware, "run camera-aware processing on the output")
      ->default_str("true");

  // process
  auto* proc = app.add_subcommand("process", "camera-aware processing of a generated dataset");
  std::string proc_in, proc_out, proc_config, proc_fill;
  std::optional<int> proc_radius;
  proc->add_option("--in", proc_in)->required()->check(CLI::ExistingDirectory);
  proc->add_option("--out", proc_out)->required();
  proc->add_option("--config", proc_config)->check(CLI::ExistingFile);
  proc->add_option("--fill", proc_fill)->check(CLI::IsMember({"shrink", "expand"}));
  proc->add_option("--patch-radius", proc_radius)->check(CLI::NonNegativeNumber);

  // validate
  auto* val = app.add_subcommand("validate", "check a generated dataset; one JSON object per line");
  std::string val_dataset;
  val->add_option("--dataset", val_dataset)->required()->check(CLI::ExistingDirectory);

  // inspect
  auto* insp = app.add_subcommand("inspect", "write per-frame depth images (PGM)");
  std::string insp_demo, insp_out;
  int insp_frame = 0;
  insp->add_option("--demo", insp_demo)->required()->check(CLI::ExistingDirectory);
  insp->add_option("--out", insp_out)->required();
  insp->add_option("--frame", insp_frame, "only this 1-based frame");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  const int jobs = resolve_jobs(g.jobs);

  try {
    if (*synth) {
      if (spec_path.empty() && builtin.empty()) throw ConfigError("synth needs --spec or --builtin");
      SceneSpec spec = builtin == "bridge"     ? example_bridge_spec()
                       : builtin == "bimanual" ? example_bimanual_spec()
                       : builtin.empty()       ? scene_spec_from_json(read_json(spec_path))
                                               : example_pick_place_spec();
      if (g.print_config) {
        echo({{"command", "synth"}, {"seed", synth_seed}, {"spec", scene_spec_to_json(spec)}});
        return 0;
      }
      const SynthScene s = make_scene(spec, synth_seed);
      const fs::path out = synth_out;
      save_demonstration(s.demo, out / "demo");
      save_tracking(s.tracking, out / "tracking");
      write_annotation(s.annotation, out / "annotation.json");
      write_json(scene_spec_to_json(spec), out / "spec.json");
      std::cerr << "synth: " << s.demo.horizon() << " frames, " << s.tracking.templates.size() << " objects -> "
                << out.string() << "\n";
      return 0;
    }
    if (*parse) {
      const PipelineConfig cfg = pipeline_config(parse_config);
      const double eps = parse_eps.value_or(cfg.set_difference_eps);
      if (!(eps > 0)) throw ConfigError("--eps must be positive");
      if (g.print_config) {
        echo({{"command", "parse"}, {"demo", parse_demo}, {"tracking", parse_tracking}, {"eps", eps}, {"jobs", jobs}});
        return 0;
      }
      const Demonstration demo = load_demonstration(parse_demo);
      const TrackingInput tracking = load_tracking(parse_tracking, demo.horizon());
      save_parsed_scene(parse_scene(demo, tracking, eps, jobs), parse_out);
      return 0;
    }
    if (*annotate) {
      if (g.print_config) {
        echo({{"command", "annotate"}, {"frames", ann_frames}, {"out", ann_out}, {"host", ann_host},
              {"port", ann_port}, {"objects", ann_objects}});
        return 0;
      }
      AnnotationService service({ann_frames, ann_out, ann_objects, ann_ui});
      const int port = service.bind(ann_host, ann_port);
      std::cerr << "annotate: serving " << service.frames().size() << " frames on http://" << ann_host << ":" << port
                << "\n";
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.serve();
      g_service = nullptr;
      return 0;
    }
    if (*gen) {
      if (gen_scenes.size() != gen_annotations.size())
        throw ConfigError("every --scene needs exactly one --annotation");
      GenerateRequest req;
      for (std::size_t i = 0; i < gen_scenes.size(); ++i) req.sources.push_back({gen_scenes[i], gen_annotations[i]});
      req.config = pipeline_config(gen_config);
      req.seed = gen_seed;
      req.out = gen_out;
      req.jobs = jobs;
      req.camera_aware = camera_aware;
      if (g.print_config) {
        json sources = json::array();
        for (const auto& s : req.sources) sources.push_back({{"scene", s.scene}, {"annotation", s.annotation}});
        echo({{"command", "generate"}, {"seed", gen_seed}, {"camera_aware", camera_aware}, {"sources", sources},
              {"config", config_to_json(req.config)}});
        return 0;
      }
      const DatasetInfo info = run_generate(req);
      for (const auto& w : info.warnings) std::cerr << "warning: " << w << "\n";
      std::cerr << "generate: " << info.produced << " of " << info.requested << " demos -> " << gen_out << "\n";
      return 0;
    }
    if (*proc) {
      PipelineConfig cfg = pipeline_config(proc_config);
      if (!proc_fill.empty()) cfg.processing.fill = proc_fill == "expand" ? FillMode::kExpand : FillMode::kShrink;
      if (proc_radius) cfg.processing.patch_radius = *proc_radius;
      cfg.validate();
      if (g.print_config) {
        echo({{"command", "process"}, {"in", proc_in}, {"out", proc_out}, {"config", config_to_json(cfg)}});
        return 0;
      }
      const DatasetInfo info = process_dataset(proc_in, proc_out, cfg.processing, cfg.bypass_nonrigid, jobs);
      std::cerr << "process: " << info.produced << " demos, effective camera " << info.effective_camera->width << "x"
                << info.effective_camera->height << "\n";
      return 0;
    }
    if (*val) {
      if (g.print_config) {
        echo({{"command", "validate"}, {"dataset", val_dataset}, {"jobs", jobs}});
        return 0;
      }
      const ValidationReport report = validate_dataset(val_dataset, jobs);
      for (const auto& r : report.records) echo(record_to_json(r));
      echo(summary_to_json(report));
      return report.ok() ? 0 : kExitValidation;
    }
    if (*insp) {
      if (g.print_config) {
        echo({{"command", "inspect"}, {"demo", insp_demo}, {"out", insp_out}, {"frame", insp_frame}});
        return 0;
      }
      std::optional<CameraModel> effective;
      const Demonstration demo = load_demonstration(insp_demo, &effective);
      const CameraModel cam = effective.value_or(demo.camera);
      if (insp_frame < 0 || insp_frame > demo.horizon())
        throw RangeError("frame " + std::to_string(insp_frame) + " outside 1.." + std::to_string(demo.horizon()));
      fs::create_directories(insp_out);
      for (int t = 1; t <= demo.horizon(); ++t) {
        if (insp_frame != 0 && t != insp_frame) continue;
        char name[32];
        std::snprintf(name, sizeof(name), "%06d.pgm", t);
        write_pgm(depth_image(demo.frames[static_cast<std::size_t>(t - 1)].observation, cam), cam,
                  fs::path(insp_out) / name);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
