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

#include "pcdgen/camera_processor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "pcdgen/errors.hpp"

namespace pcdgen {

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();

bool cell_of(const PixelPoint& p, const CameraModel& cam, int& x, int& y) {
  x = static_cast<int>(std::floor(p.u));
  y = static_cast<int>(std::floor(p.v));
  return x >= 0 && y >= 0 && x < cam.width && y < cam.height;
}

std::size_t index(int x, int y, int width) {
  return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
}

// Sliding minimum over a (2r+1) window along one axis.
void window_min(std::vector<double>& img, int w, int h, int r, bool along_x) {
  std::vector<double> out(img.size());
  const int len = along_x ? w : h;
  const int lines = along_x ? h : w;
  std::vector<double> line(static_cast<std::size_t>(len));
  std::deque<int> q;
  for (int l = 0; l < lines; ++l) {
    for (int i = 0; i < len; ++i)
      line[static_cast<std::size_t>(i)] = along_x ? img[index(i, l, w)] : img[index(l, i, w)];
    q.clear();
    int next = 0;
    for (int i = 0; i < len; ++i) {
      const int hi = std::min(len - 1, i + r);
      for (; next <= hi; ++next) {
        while (!q.empty() && line[static_cast<std::size_t>(q.back())] >= line[static_cast<std::size_t>(next)])
          q.pop_back();
        q.push_back(next);
      }
      while (q.front() < i - r) q.pop_front();
      const double m = line[static_cast<std::size_t>(q.front())];
      if (along_x) out[index(i, l, w)] = m; else out[index(l, i, w)] = m;
    }
  }
  img.swap(out);
}

}  // namespace

void ProcessorConfig::validate() const {
  if (patch_radius < 0) throw ConfigError("patch radius must be >= 0");
  if (!(depth_margin >= 0)) throw ConfigError("depth margin must be >= 0");
  if (coverage_closing < 0) throw ConfigError("coverage closing radius must be >= 0");
  if (min_width < 1 || min_height < 1) throw ConfigError("minimum shrink size must be positive");
}

std::vector<PixelPoint> project(const PointCloud& cloud, const CameraModel& cam,
                                const std::set<std::uint16_t>& bypass_labels) {
  std::vector<PixelPoint> out;
  out.reserve(static_cast<std::size_t>(cloud.size()));
  const bool labelled = cloud.has_labels() && !bypass_labels.empty();
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const double x = cloud.points(i, 0), y = cloud.points(i, 1), z = cloud.points(i, 2);
    if (!(z > 0)) continue;
    PixelPoint p;
    p.u = cam.fx * x / z + cam.cx;
    p.v = cam.fy * y / z + cam.cy;
    p.d = z;
    p.source = i;
    p.bypass = labelled && bypass_labels.count(cloud.labels(i)) > 0;
    out.push_back(p);
  }
  return out;
}

std::vector<PixelPoint> crop(std::span<const PixelPoint> pixels, const CameraModel& cam, bool clip_depth) {
  std::vector<PixelPoint> out;
  out.reserve(pixels.size());
  for (const auto& p : pixels) {
    if (p.u < 0 || p.u >= cam.width || p.v < 0 || p.v >= cam.height) continue;
    if (clip_depth && (p.d < cam.depth_min || p.d > cam.depth_max)) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<PixelPoint> zbuffer_patch(std::span<const PixelPoint> pixels, const CameraModel& cam,
                                      const ProcessorConfig& cfg) {
  const int w = cam.width, h = cam.height, r = cfg.patch_radius;
  std::vector<double> nearest(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kInf);
  int x = 0, y = 0;
  for (const auto& p : pixels)
    if (cell_of(p, cam, x, y)) nearest[index(x, y, w)] = std::min(nearest[index(x, y, w)], p.d);

  std::vector<double> occluder = nearest;
  if (r > 0) {
    if (cfg.metric == PatchMetric::kChebyshev) {
      window_min(occluder, w, h, r, true);
      window_min(occluder, w, h, r, false);
    } else {
      for (int cy = 0; cy < h; ++cy)
        for (int cx = 0; cx < w; ++cx) {
          double m = kInf;
          for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
              if (dx * dx + dy * dy > r * r) continue;
              const int nx = cx + dx, ny = cy + dy;
              if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
              m = std::min(m, nearest[index(nx, ny, w)]);
            }
          occluder[index(cx, cy, w)] = m;
        }
    }
  }

  std::vector<PixelPoint> out;
  out.reserve(pixels.size());
  for (const auto& p : pixels) {
    if (!cell_of(p, cam, x, y)) continue;
    if (p.bypass || !(occluder[index(x, y, w)] < p.d - cfg.depth_margin)) out.push_back(p);
  }
  return out;
}

CoverageMask coverage_mask(std::span<const PixelPoint> env_pixels, const CameraModel& cam, int closing) {
  CoverageMask m{cam.width, cam.height, std::vector<std::uint8_t>(
                                            static_cast<std::size_t>(cam.width) * cam.height, 0)};
  int x = 0, y = 0;
  for (const auto& p : env_pixels)
    if (cell_of(p, cam, x, y)) m.cells[index(x, y, m.width)] = 1;
  if (closing <= 0) return m;

  // Square structuring element, separable. Dilation ignores the outside,
  // erosion treats it as covered.
  auto pass = [&](std::vector<std::uint8_t>& img, bool dilate, bool along_x) {
    std::vector<std::uint8_t> out(img.size());
    for (int yy = 0; yy < m.height; ++yy)
      for (int xx = 0; xx < m.width; ++xx) {
        std::uint8_t acc = dilate ? 0 : 1;
        for (int k = -closing; k <= closing; ++k) {
          const int nx = along_x ? xx + k : xx, ny = along_x ? yy : yy + k;
          if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
          const std::uint8_t val = img[index(nx, ny, m.width)];
          acc = dilate ? std::max(acc, val) : std::min(acc, val);
        }
        out[index(xx, yy, m.width)] = acc;
      }
    img.swap(out);
  };
  pass(m.cells, true, true);
  pass(m.cells, true, false);
  pass(m.cells, false, true);
  pass(m.cells, false, false);
  return m;
}

CoverageMask intersect(const CoverageMask& a, const CoverageMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw InvariantViolation("coverage masks have different sizes");
  CoverageMask out = a;
  for (std::size_t i = 0; i < out.cells.size(); ++i) out.cells[i] = a.cells[i] & b.cells[i];
  return out;
}

PixelRect largest_covered_rectangle(const CoverageMask& mask) {
  PixelRect best;
  long best_area = 0;
  std::vector<int> heights(static_cast<std::size_t>(mask.width) + 1, 0);
  std::vector<int> stack;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x)
      heights[static_cast<std::size_t>(x)] = mask.at(x, y) ? heights[static_cast<std::size_t>(x)] + 1 : 0;
    stack.clear();
    for (int x = 0; x <= mask.width; ++x) {
      const int hx = heights[static_cast<std::size_t>(x)];  // sentinel 0 at x = width
      while (!stack.empty() && heights[static_cast<std::size_t>(stack.back())] >= hx) {
        const int top = stack.back();
        stack.pop_back();
        const int hh = heights[static_cast<std::size_t>(top)];
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const long area = static_cast<long>(hh) * (x - left);
        if (area > best_area) {
          best_area = area;
          best = {left, y - hh + 1, x - left, hh};
        }
      }
      stack.push_back(x);
    }
  }
  return best;
}

CameraModel shrink_camera(const CameraModel& cam, const PixelRect& rect, const ProcessorConfig& cfg) {
  if (rect.width < cfg.min_width || rect.height < cfg.min_height)
    throw FillInfeasible("shrink rectangle " + std::to_string(rect.width) + "x" + std::to_string(rect.height) +
                         " is below the minimum " + std::to_string(cfg.min_width) + "x" +
                         std::to_string(cfg.min_height));
  CameraModel out = cam;
  out.width = rect.width;
  out.height = rect.height;
  out.cx = cam.cx - rect.x0;
  out.cy = cam.cy - rect.y0;
  if (!(out.cx > 0 && out.cx < out.width && out.cy > 0 && out.cy < out.height))
    throw FillInfeasible("shrink rectangle excludes the principal point");
  return out;
}

FillResult fill(std::span<const PixelPoint> pixels, const CameraModel& cam, const ProcessorConfig& cfg,
                std::span<const PixelPoint> env_pixels, std::optional<PixelRect> rect) {
  FillResult res;
  if (cfg.fill == FillMode::kShrink) {
    res.rect = rect ? *rect : largest_covered_rectangle(coverage_mask(env_pixels, cam, cfg.coverage_closing));
    res.camera = shrink_camera(cam, res.rect, cfg);
    res.pixels.reserve(pixels.size());
    const PixelRect& r = res.rect;
    for (PixelPoint p : pixels) {
      if (p.u < r.x0 || p.u >= r.x0 + r.width || p.v < r.y0 || p.v >= r.y0 + r.height) continue;
      p.u -= r.x0;
      p.v -= r.y0;
      res.pixels.push_back(p);
    }
    return res;
  }

  // Expand: grow environment depth outward into uncovered cells, nearest
  // covered cell first (8-connected breadth-first order).
  const int w = cam.width, h = cam.height;
  res.camera = cam;
  res.rect = {0, 0, w, h};
  res.pixels.assign(pixels.begin(), pixels.end());
  const CoverageMask covered = coverage_mask(env_pixels, cam, cfg.coverage_closing);
  std::vector<int> seed(static_cast<std::size_t>(w) * h, -1);  // env pixel carrying the depth
  std::vector<std::uint8_t> occupied(seed.size(), 0);
  int x = 0, y = 0;
  for (std::size_t i = 0; i < env_pixels.size(); ++i) {
    if (!cell_of(env_pixels[i], cam, x, y)) continue;
    const std::size_t c = index(x, y, w);
    if (seed[c] < 0 || env_pixels[i].d < env_pixels[static_cast<std::size_t>(seed[c])].d)
      seed[c] = static_cast<int>(i);
  }
  for (const auto& p : pixels)
    if (cell_of(p, cam, x, y)) occupied[index(x, y, w)] = 1;

  std::deque<std::size_t> queue;
  for (std::size_t c = 0; c < seed.size(); ++c)
    if (seed[c] >= 0) queue.push_back(c);
  while (!queue.empty()) {
    const std::size_t c = queue.front();
    queue.pop_front();
    const int cx = static_cast<int>(c % static_cast<std::size_t>(w));
    const int cy = static_cast<int>(c / static_cast<std::size_t>(w));
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = cx + dx, ny = cy + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t n = index(nx, ny, w);
        if (seed[n] >= 0 || covered.cells[n]) continue;
        seed[n] = seed[c];
        queue.push_back(n);
        if (!occupied[n]) {
          const PixelPoint& src = env_pixels[static_cast<std::size_t>(seed[c])];
          PixelPoint p;
          p.u = nx + 0.5;
          p.v = ny + 0.5;
          p.d = src.d;
          p.source = src.source;
          p.synthesized = true;
          res.pixels.push_back(p);
        }
      }
  }
  return res;
}

PointCloud backproject(std::span<const PixelPoint> pixels, const CameraModel& cam, const PointCloud& source) {
  PointCloud out;
  const auto n = static_cast<Eigen::Index>(pixels.size());
  out.points.resize(n, 3);
  if (source.has_colors()) out.colors.resize(n, 3);
  if (source.has_labels()) out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PixelPoint& p = pixels[static_cast<std::size_t>(i)];
    out.points(i, 0) = static_cast<float>((p.u - cam.cx) * p.d / cam.fx);
    out.points(i, 1) = static_cast<float>((p.v - cam.cy) * p.d / cam.fy);
    out.points(i, 2) = static_cast<float>(p.d);
    if (p.source >= 0) {
      if (source.has_colors()) out.colors.row(i) = source.colors.row(p.source);
      if (source.has_labels()) out.labels(i) = source.labels(p.source);
    }
  }
  return out;
}

namespace {

// Scene pixels that define image coverage: environment and objects. Arm
// points are excluded so an arm reaching into an empty band does not count.
// Expand mode only replicates environment depth.
std::vector<PixelPoint> environment_pixels(std::span<const PixelPoint> pixels, const PointCloud& cloud,
                                           bool scene_only) {
  if (!cloud.has_labels()) return {pixels.begin(), pixels.end()};
  std::vector<PixelPoint> env;
  for (const auto& p : pixels) {
    const std::uint16_t label = cloud.labels(p.source);
    if (scene_only ? label == kEnvironmentLabel : !is_arm_label(label)) env.push_back(p);
  }
  return env;
}

}  // namespace

ProcessedFrame process_frame(const PointCloud& cloud, const CameraModel& cam, const ProcessorConfig& cfg,
                             std::optional<PixelRect> rect) {
  const auto cropped = crop(project(cloud, cam, cfg.bypass_labels), cam, cfg.clip_depth);
  const auto env = environment_pixels(cropped, cloud, cfg.fill == FillMode::kExpand);
  auto visible = zbuffer_patch(cropped, cam, cfg);

  std::vector<Eigen::Index> bypassed;
  std::vector<PixelPoint> regular;
  regular.reserve(visible.size());
  for (const auto& p : visible) (p.bypass ? void(bypassed.push_back(p.source)) : regular.push_back(p));

  FillResult filled = fill(regular, cam, cfg, env, rect);
  ProcessedFrame out;
  out.camera = filled.camera;
  out.rect = filled.rect;
  if (bypassed.empty()) {
    out.cloud = backproject(filled.pixels, filled.camera, cloud);
  } else {
    const PointCloud parts[2] = {backproject(filled.pixels, filled.camera, cloud), select(cloud, bypassed)};
    out.cloud = concat(parts);
  }
  return out;
}

CoverageMask environment_coverage(const PointCloud& cloud, const CameraModel& cam, const ProcessorConfig& cfg) {
  const auto cropped = crop(project(cloud, cam), cam, cfg.clip_depth);
  return coverage_mask(environment_pixels(cropped, cloud, false), cam, cfg.coverage_closing);
}

PixelRect dataset_rectangle(std::span<const CoverageMask> masks, const CameraModel& cam,
                            const ProcessorConfig& cfg) {
  if (masks.empty()) return {0, 0, cam.width, cam.height};
  CoverageMask all = masks.front();
  for (std::size_t i = 1; i < masks.size(); ++i) all = intersect(all, masks[i]);
  const PixelRect rect = largest_covered_rectangle(all);
  shrink_camera(cam, rect, cfg);  // feasibility check
  return rect;
}

std::vector<float> depth_image(const PointCloud& cloud, const CameraModel& cam) {
  std::vector<float> img(static_cast<std::size_t>(cam.width) * cam.height, 0.0f);
  int x = 0, y = 0;
  for (const auto& p : crop(project(cloud, cam), cam, false)) {
    if (!cell_of(p, cam, x, y)) continue;
    float& cell = img[index(x, y, cam.width)];
    if (cell == 0.0f || p.d < cell) cell = static_cast<float>(p.d);
  }
  return img;
}

}  // namespace pcdgen
