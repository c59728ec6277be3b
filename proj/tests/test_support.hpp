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

// Shared fixtures and brute-force oracles for the test suites.
#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "pcdgen/augment.hpp"
#include "pcdgen/camera_processor.hpp"
#include "pcdgen/scene_parser.hpp"
#include "pcdgen/synth.hpp"

namespace pcdgen::testing {

// A synthesized and parsed source scene with its augmentation context.
struct SourceFixture {
  SceneSpec spec;
  SynthScene synth;
  ParsedScene scene;
  std::unique_ptr<AugmentContext> context;
};

inline SceneSpec builtin_spec(const std::string& name) {
  if (name == "bridge") return example_bridge_spec();
  if (name == "bimanual") return example_bimanual_spec();
  return example_pick_place_spec();
}

// Built once per process and shared.
inline const SourceFixture& source_fixture(const std::string& name, std::uint64_t seed = 7) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, std::uint64_t>, std::unique_ptr<SourceFixture>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{name, seed}];
  if (!slot) {
    slot = std::make_unique<SourceFixture>();
    slot->spec = builtin_spec(name);
    slot->synth = make_scene(slot->spec, seed);
    slot->scene = parse_scene(slot->synth.demo, slot->synth.tracking);
    slot->context = std::make_unique<AugmentContext>(slot->scene, slot->synth.annotation);
  }
  return *slot;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pcdgen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline CameraModel test_camera(int width = 64, int height = 48) {
  CameraModel cam;
  cam.fx = cam.fy = 60;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  cam.depth_min = 0.1;
  cam.depth_max = 5.0;
  return cam;
}

// Random in-frustum points; depth quantized to a few layers so occlusion
// relations are dense.
inline PointCloud random_frustum_cloud(std::mt19937_64& rng, const CameraModel& cam, int n, bool labels = true) {
  std::uniform_real_distribution<double> u(0.0, cam.width), v(0.0, cam.height), z(0.5, 3.0);
  std::uniform_int_distribution<int> lab(0, 3);
  PointCloud c;
  c.points.resize(n, 3);
  if (labels) c.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const double d = z(rng), x = u(rng), y = v(rng);
    c.points(i, 0) = static_cast<float>((x - cam.cx) * d / cam.fx);
    c.points(i, 1) = static_cast<float>((y - cam.cy) * d / cam.fy);
    c.points(i, 2) = static_cast<float>(d);
    if (labels) c.labels(i) = static_cast<std::uint16_t>(lab(rng));
  }
  return c;
}

// O(N^2) occlusion oracle: a point is removed when any other point whose
// pixel cell lies within `radius` (in the given metric) is nearer by more than
// `margin`.
inline std::vector<bool> brute_force_zbuffer(const std::vector<PixelPoint>& px, int radius, double margin,
                                             PatchMetric metric) {
  std::vector<bool> keep(px.size(), true);
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (px[i].bypass) continue;
    for (std::size_t j = 0; j < px.size(); ++j) {
      if (i == j) continue;
      const int du = static_cast<int>(std::floor(px[i].u)) - static_cast<int>(std::floor(px[j].u));
      const int dv = static_cast<int>(std::floor(px[i].v)) - static_cast<int>(std::floor(px[j].v));
      const bool inside = metric == PatchMetric::kChebyshev ? std::max(std::abs(du), std::abs(dv)) <= radius
                                                            : du * du + dv * dv <= radius * radius;
      if (inside && px[j].d < px[i].d - margin) {
        keep[i] = false;
        break;
      }
    }
  }
  return keep;
}

}  // namespace pcdgen::testing
