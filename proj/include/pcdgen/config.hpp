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

#include <filesystem>

#include <nlohmann/json.hpp>

#include "pcdgen/augment.hpp"
#include "pcdgen/camera_processor.hpp"

namespace pcdgen {

struct ValidationTolerances {
  double rigidity = 1e-6;   // m and rad
  double bimanual = 1e-9;   // max abs entry drift of the inter-arm pose
  double plane = 1e-6;      // m
  double step_slack = 1e-9; // m, on top of the motion step bound
};

// Everything the generate / process / validate commands can be configured
// with. Angles are degrees in files and radians in memory.
struct PipelineConfig {
  SamplerConfig sampler;
  ProcessorConfig processing;
  bool bypass_nonrigid = true;  // exempt non-rigid objects from occlusion removal
  double set_difference_eps = 0.005;
  ValidationTolerances tolerances;

  void validate() const;
};

// Missing keys keep their defaults; unknown keys are a ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace pcdgen
