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
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "pcdgen/types.hpp"

namespace pcdgen {

struct PixelPoint {
  double u = 0, v = 0, d = 0;
  Eigen::Index source = -1;  // row in the projected cloud
  bool bypass = false;       // exempt from occlusion removal
  bool synthesized = false;  // created by expand-mode fill
};

enum class FillMode { kShrink, kExpand };
enum class PatchMetric { kChebyshev, kEuclidean };

struct ProcessorConfig {
  int patch_radius = 2;
  double depth_margin = 0.005;
  PatchMetric metric = PatchMetric::kChebyshev;
  FillMode fill = FillMode::kShrink;
  bool clip_depth = true;
  int coverage_closing = 1;  // morphological closing radius of the coverage mask
  int min_width = 32;
  int min_height = 32;
  std::set<std::uint16_t> bypass_labels;  // e.g. non-rigid objects

  void validate() const;
};

// Half-open pixel rectangle [x0, x0 + width) x [y0, y0 + height).
struct PixelRect {
  int x0 = 0, y0 = 0, width = 0, height = 0;
  bool operator==(const PixelRect&) const = default;
};

// Row-major width x height grid of 0/1 flags.
struct CoverageMask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const CoverageMask&) const = default;
};

std::vector<PixelPoint> project(const PointCloud& cloud, const CameraModel& cam,
                                const std::set<std::uint16_t>& bypass_labels = {});

std::vector<PixelPoint> crop(std::span<const PixelPoint> pixels, const CameraModel& cam,
                             bool clip_depth = true);

std::vector<PixelPoint> zbuffer_patch(std::span<const PixelPoint> pixels, const CameraModel& cam,
                                      const ProcessorConfig& cfg);

// Cells hit by at least one pixel, closed with a square structuring element of
// the given radius. Outside-image cells count as covered during erosion so the
// border is not eaten away.
CoverageMask coverage_mask(std::span<const PixelPoint> env_pixels, const CameraModel& cam, int closing);
CoverageMask intersect(const CoverageMask& a, const CoverageMask& b);

PixelRect largest_covered_rectangle(const CoverageMask& mask);

// Intrinsics of the image cropped to `rect`; FillInfeasible when the rectangle
// is below the configured minimum or leaves the principal point outside.
CameraModel shrink_camera(const CameraModel& cam, const PixelRect& rect, const ProcessorConfig& cfg);

struct FillResult {
  std::vector<PixelPoint> pixels;
  CameraModel camera;
  PixelRect rect;
};

// `rect` overrides the per-frame shrink rectangle (dataset-level shrink).
FillResult fill(std::span<const PixelPoint> pixels, const CameraModel& cam, const ProcessorConfig& cfg,
                std::span<const PixelPoint> env_pixels, std::optional<PixelRect> rect = std::nullopt);

// Pixels are expected in `cam` coordinates; colours and labels come from
// `source` via PixelPoint::source.
PointCloud backproject(std::span<const PixelPoint> pixels, const CameraModel& cam,
                       const PointCloud& source);

struct ProcessedFrame {
  PointCloud cloud;
  CameraModel camera;
  PixelRect rect;
};

ProcessedFrame process_frame(const PointCloud& cloud, const CameraModel& cam, const ProcessorConfig& cfg,
                             std::optional<PixelRect> rect = std::nullopt);

// Closed coverage mask of the non-arm points of `cloud` (all points when the
// cloud carries no labels).
CoverageMask environment_coverage(const PointCloud& cloud, const CameraModel& cam,
                                  const ProcessorConfig& cfg);

// Dataset-level shrink: the largest rectangle covered in every mask.
PixelRect dataset_rectangle(std::span<const CoverageMask> masks, const CameraModel& cam,
                            const ProcessorConfig& cfg);

// Depth image (0 = empty) of the nearest point per cell, for inspection.
std::vector<float> depth_image(const PointCloud& cloud, const CameraModel& cam);

}  // namespace pcdgen
