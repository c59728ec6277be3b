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

#include "pcdgen/metrics.hpp"

#include <cmath>
#include <limits>

#include "pcdgen/kdtree.hpp"

namespace pcdgen {

double mean_nearest_distance(const PointCloud& from, const PointCloud& to) {
  if (from.empty()) return 0.0;
  if (to.empty()) return std::numeric_limits<double>::infinity();
  const KdTree tree(to.points);
  double sum = 0;
  for (Eigen::Index i = 0; i < from.size(); ++i)
    sum += std::sqrt(tree.nearest_squared_distance(from.points.row(i).transpose().cast<double>()));
  return sum / static_cast<double>(from.size());
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  if (a.empty() && b.empty()) return 0.0;
  return 0.5 * (mean_nearest_distance(a, b) + mean_nearest_distance(b, a));
}

double coverage_fraction(const PointCloud& reference, const PointCloud& candidate, double tolerance) {
  if (reference.empty()) return 1.0;
  if (candidate.empty()) return 0.0;
  const KdTree tree(candidate.points);
  Eigen::Index hit = 0;
  for (Eigen::Index i = 0; i < reference.size(); ++i)
    if (tree.any_within(reference.points.row(i).transpose().cast<double>(), tolerance * tolerance)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(reference.size());
}

}  // namespace pcdgen
