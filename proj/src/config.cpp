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

#include "pcdgen/config.hpp"

#include <cmath>
#include <set>
#include <string>

#include "pcdgen/container_io.hpp"
#include "pcdgen/errors.hpp"

namespace pcdgen {

namespace {

using json = nlohmann::json;

constexpr double kDeg = M_PI / 180.0;

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_deg(const json& j, const char* key, double& radians) {
  if (j.contains(key)) radians = j.at(key).get<double>() * kDeg;
}

Eigen::Vector2d pair(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void PipelineConfig::validate() const {
  sampler.validate();
  processing.validate();
  if (!(set_difference_eps > 0)) throw ConfigError("set_difference_eps must be positive");
  if (!(tolerances.rigidity >= 0 && tolerances.bimanual >= 0 && tolerances.plane >= 0 && tolerances.step_slack >= 0))
    throw ConfigError("tolerances must be >= 0");
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  try {
    reject_unknown(j, "config", {"sampler", "motion", "processing", "parse", "validation"});
    if (j.contains("sampler")) {
      const json& s = j["sampler"];
      reject_unknown(s, "sampler",
                     {"workspace", "rotation_deg", "mode", "locations", "clearance", "max_attempts",
                      "nonrigid_translation", "nonrigid_rotation_deg", "perturb_radius", "perturb_rotation_deg",
                      "replays", "combinations", "perturbations", "env_translation", "env_rotation_deg"});
      SamplerConfig& o = c.sampler;
      if (s.contains("workspace")) {
        reject_unknown(s["workspace"], "sampler.workspace", {"x", "y"});
        const Eigen::Vector2d x = pair(s["workspace"].at("x")), y = pair(s["workspace"].at("y"));
        o.workspace.lo = {x[0], y[0]};
        o.workspace.hi = {x[1], y[1]};
      }
      if (s.contains("rotation_deg")) {
        const Eigen::Vector2d r = pair(s["rotation_deg"]);
        o.rotation_min = r[0] * kDeg;
        o.rotation_max = r[1] * kDeg;
      }
      if (s.contains("mode")) {
        const std::string m = s["mode"].get<std::string>();
        if (m == "continuous") o.mode = SamplingMode::kContinuous;
        else if (m == "grid") o.mode = SamplingMode::kGrid;
        else if (m == "identity") o.mode = SamplingMode::kIdentity;
        else throw ConfigError("unknown sampling mode '" + m + "'");
      }
      if (s.contains("locations")) {
        o.locations.clear();
        for (const json& l : s["locations"]) o.locations.push_back(pair(l));
      }
      read(s, "clearance", o.clearance);
      read(s, "max_attempts", o.max_attempts);
      read(s, "nonrigid_translation", o.nonrigid_translation);
      read_deg(s, "nonrigid_rotation_deg", o.nonrigid_rotation);
      read(s, "perturb_radius", o.perturb_radius);
      read_deg(s, "perturb_rotation_deg", o.perturb_rotation);
      read(s, "replays", o.replays);
      read(s, "combinations", o.combinations);
      read(s, "perturbations", o.perturbations);
      read(s, "env_translation", o.env_translation);
      read_deg(s, "env_rotation_deg", o.env_rotation);
    }
    if (j.contains("motion")) {
      const json& m = j["motion"];
      reject_unknown(m, "motion", {"step", "angle_step_deg", "lift"});
      read(m, "step", c.sampler.motion.step);
      read_deg(m, "angle_step_deg", c.sampler.motion.angle_step);
      read(m, "lift", c.sampler.motion.lift);
    }
    if (j.contains("processing")) {
      const json& p = j["processing"];
      reject_unknown(p, "processing",
                     {"patch_radius", "depth_margin", "metric", "fill", "clip_depth", "coverage_closing", "min_size",
                      "bypass_nonrigid"});
      ProcessorConfig& o = c.processing;
      read(p, "patch_radius", o.patch_radius);
      read(p, "depth_margin", o.depth_margin);
      if (p.contains("metric")) {
        const std::string m = p["metric"].get<std::string>();
        if (m == "chebyshev") o.metric = PatchMetric::kChebyshev;
        else if (m == "euclidean") o.metric = PatchMetric::kEuclidean;
        else throw ConfigError("unknown patch metric '" + m + "'");
      }
      if (p.contains("fill")) {
        const std::string f = p["fill"].get<std::string>();
        if (f == "shrink") o.fill = FillMode::kShrink;
        else if (f == "expand") o.fill = FillMode::kExpand;
        else throw ConfigError("unknown fill mode '" + f + "'");
      }
      read(p, "clip_depth", o.clip_depth);
      read(p, "coverage_closing", o.coverage_closing);
      if (p.contains("min_size")) {
        o.min_width = p["min_size"].at(0).get<int>();
        o.min_height = p["min_size"].at(1).get<int>();
      }
      read(p, "bypass_nonrigid", c.bypass_nonrigid);
    }
    if (j.contains("parse")) {
      reject_unknown(j["parse"], "parse", {"set_difference_eps"});
      read(j["parse"], "set_difference_eps", c.set_difference_eps);
    }
    if (j.contains("validation")) {
      const json& v = j["validation"];
      reject_unknown(v, "validation", {"rigidity", "bimanual", "plane", "step_slack"});
      read(v, "rigidity", c.tolerances.rigidity);
      read(v, "bimanual", c.tolerances.bimanual);
      read(v, "plane", c.tolerances.plane);
      read(v, "step_slack", c.tolerances.step_slack);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  const SamplerConfig& s = c.sampler;
  const ProcessorConfig& p = c.processing;
  json locations = json::array();
  for (const auto& l : s.locations) locations.push_back({l.x(), l.y()});
  const char* mode = s.mode == SamplingMode::kGrid ? "grid" : s.mode == SamplingMode::kIdentity ? "identity" : "continuous";
  return {
      {"sampler",
       {{"workspace", {{"x", {s.workspace.lo.x(), s.workspace.hi.x()}}, {"y", {s.workspace.lo.y(), s.workspace.hi.y()}}}},
        {"rotation_deg", {s.rotation_min / kDeg, s.rotation_max / kDeg}},
        {"mode", mode},
        {"locations", locations},
        {"clearance", s.clearance},
        {"max_attempts", s.max_attempts},
        {"nonrigid_translation", s.nonrigid_translation},
        {"nonrigid_rotation_deg", s.nonrigid_rotation / kDeg},
        {"perturb_radius", s.perturb_radius},
        {"perturb_rotation_deg", s.perturb_rotation / kDeg},
        {"replays", s.replays},
        {"combinations", s.combinations},
        {"perturbations", s.perturbations},
        {"env_translation", s.env_translation},
        {"env_rotation_deg", s.env_rotation / kDeg}}},
      {"motion", {{"step", s.motion.step}, {"angle_step_deg", s.motion.angle_step / kDeg}, {"lift", s.motion.lift}}},
      {"processing",
       {{"patch_radius", p.patch_radius},
        {"depth_margin", p.depth_margin},
        {"metric", p.metric == PatchMetric::kEuclidean ? "euclidean" : "chebyshev"},
        {"fill", p.fill == FillMode::kExpand ? "expand" : "shrink"},
        {"clip_depth", p.clip_depth},
        {"coverage_closing", p.coverage_closing},
        {"min_size", {p.min_width, p.min_height}},
        {"bypass_nonrigid", c.bypass_nonrigid}}},
      {"parse", {{"set_difference_eps", c.set_difference_eps}}},
      {"validation",
       {{"rigidity", c.tolerances.rigidity},
        {"bimanual", c.tolerances.bimanual},
        {"plane", c.tolerances.plane},
        {"step_slack", c.tolerances.step_slack}}}};
}

PipelineConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

}  // namespace pcdgen
