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

#include "pcdgen/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace pcdgen {

KdTree::KdTree(const Points& points) {
  std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    pts[static_cast<std::size_t>(i)] = points.row(i).transpose().cast<double>();
  nodes_.reserve(pts.size());
  root_ = build(pts, 0, static_cast<int>(pts.size()), 0);
}

int KdTree::build(std::vector<Eigen::Vector3d>& pts, int begin, int end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(pts.begin() + begin, pts.begin() + mid, pts.begin() + end,
                   [axis](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a[axis] < b[axis]; });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({pts[static_cast<std::size_t>(mid)], axis, -1, -1});
  const int left = build(pts, begin, mid, depth + 1);
  const int right = build(pts, mid + 1, end, depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTree::search(int node, const Eigen::Vector3d& q, double& best) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  best = std::min(best, (n.point - q).squaredNorm());
  const double delta = q[n.axis] - n.point[n.axis];
  search(delta < 0 ? n.left : n.right, q, best);
  if (delta * delta <= best) search(delta < 0 ? n.right : n.left, q, best);
}

double KdTree::nearest_squared_distance(const Eigen::Vector3d& query) const {
  double best = std::numeric_limits<double>::infinity();
  search(root_, query, best);
  return best;
}

bool KdTree::within(int node, const Eigen::Vector3d& q, double radius_sq) const {
  if (node < 0) return false;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if ((n.point - q).squaredNorm() <= radius_sq) return true;
  const double delta = q[n.axis] - n.point[n.axis];
  if (within(delta < 0 ? n.left : n.right, q, radius_sq)) return true;
  return delta * delta <= radius_sq && within(delta < 0 ? n.right : n.left, q, radius_sq);
}

bool KdTree::any_within(const Eigen::Vector3d& query, double radius_sq) const {
  return within(root_, query, radius_sq);
}

}  // namespace pcdgen
