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

#include "pcdgen/table_plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "pcdgen/errors.hpp"

namespace pcdgen {

namespace {

Plane oriented(Eigen::Vector3d n, double d) {
  n.normalize();
  if (d < 0 || (d == 0 && n.z() > 0)) {
    n = -n;
    d = -d;
  }
  return {n, d};
}

}  // namespace

Plane least_squares_plane(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3) throw DegenerateGeometry("plane fit needs at least three points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d ev = solver.eigenvalues();
  // Collinear input: two vanishing eigenvalues.
  if (ev(1) <= 1e-18 * std::max(1.0, ev(2))) throw DegenerateGeometry("points are collinear");
  const Eigen::Vector3d n = solver.eigenvectors().col(0);
  return oriented(n, -n.dot(centroid));
}

Plane fit_table_plane(const PointCloud& env, const PlaneFitOptions& options) {
  const Eigen::Index n = env.size();
  if (n < 3) throw DegenerateGeometry("plane fit needs at least three points");
  std::vector<Eigen::Vector3d> all(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = env.points.row(i).transpose().cast<double>();

  std::vector<Eigen::Vector3d> scoring;
  const Eigen::Index stride = std::max<Eigen::Index>(1, n / options.max_scoring_points);
  for (Eigen::Index i = 0; i < n; i += stride) scoring.push_back(all[static_cast<std::size_t>(i)]);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::size_t best_count = 0;
  Plane best;
  bool found = false;
  for (int it = 0; it < options.iterations; ++it) {
    const std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
    if (i == j || j == k || i == k) continue;
    const Eigen::Vector3d normal = (all[j] - all[i]).cross(all[k] - all[i]);
    const double len = normal.norm();
    if (len < 1e-12) continue;
    const Plane candidate = oriented(normal / len, -(normal / len).dot(all[i]));
    std::size_t count = 0;
    for (const auto& p : scoring)
      if (std::abs(candidate.signed_distance(p)) <= options.inlier_threshold) ++count;
    if (!found || count > best_count) {
      best = candidate;
      best_count = count;
      found = true;
    }
  }
  if (!found) throw DegenerateGeometry("no non-degenerate point triple");

  std::vector<Eigen::Vector3d> inliers;
  for (const auto& p : all)
    if (std::abs(best.signed_distance(p)) <= options.inlier_threshold) inliers.push_back(p);
  if (static_cast<double>(inliers.size()) < options.min_inlier_fraction * static_cast<double>(n) ||
      inliers.size() < 3)
    throw DegenerateGeometry("no plane explains enough points");
  return least_squares_plane(inliers);
}

TableFrame::TableFrame(const Plane& plane, const Eigen::Vector3d& anchor) : plane_(plane) {
  const Eigen::Vector3d z = plane.normal.normalized();
  Eigen::Vector3d x = Eigen::Vector3d::UnitX() - z * z.x();
  if (x.norm() < 1e-6) x = Eigen::Vector3d::UnitY() - z * z.y();
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  const Eigen::Vector3d origin = anchor - z * plane.signed_distance(anchor);
  Eigen::Matrix3d r;
  r << x, y, z;
  table_to_camera_ = make_pose(r, origin);
}

Eigen::Vector2d TableFrame::to_table(const Eigen::Vector3d& p) const {
  return (table_to_camera_.inverse() * p).head<2>();
}

Pose TableFrame::in_plane_transform(const Eigen::Vector2d& pivot, double angle,
                                    const Eigen::Vector2d& shift) const {
  const Eigen::Rotation2Dd rot(angle);
  const Eigen::Vector2d t2 = pivot + shift - rot * pivot;
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r.topLeftCorner<2, 2>() = rot.toRotationMatrix();
  const Pose local = make_pose(r, Eigen::Vector3d(t2.x(), t2.y(), 0.0));
  return table_to_camera_ * local * table_to_camera_.inverse();
}

Polygon convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_convex(const Polygon& poly, const Eigen::Vector2d& p) {
  if (poly.size() < 3) return false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    if ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x()) < 0) return false;
  }
  return true;
}

namespace {

double segment_point_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2) {
  auto orient = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double v = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    return (v > 0) - (v < 0);
  };
  return orient(p1, p2, q1) * orient(p1, p2, q2) < 0 && orient(q1, q2, p1) * orient(q1, q2, p2) < 0;
}

}  // namespace

double polygon_distance(const Polygon& a, const Polygon& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  if (point_in_convex(a, b.front()) || point_in_convex(b, a.front())) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t na = a.size(), nb = b.size();
  for (std::size_t i = 0; i < na; ++i) {
    const auto& a0 = a[i];
    const auto& a1 = a[(i + 1) % na];
    for (std::size_t j = 0; j < nb; ++j) {
      const auto& b0 = b[j];
      const auto& b1 = b[(j + 1) % nb];
      if (segments_intersect(a0, a1, b0, b1)) return 0.0;
      best = std::min({best, segment_point_distance(a0, a1, b0), segment_point_distance(b0, b1, a0)});
    }
  }
  return best;
}

}  // namespace pcdgen
