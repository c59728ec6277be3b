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

#include <vector>

#include <Eigen/Core>

#include "pcdgen/types.hpp"

namespace pcdgen {

// Static 3-d tree over float points for exact nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(const Points& points);

  bool empty() const { return nodes_.empty(); }

  // Squared distance (double precision) to the nearest stored point, or
  // +inf when the tree is empty.
  double nearest_squared_distance(const Eigen::Vector3d& query) const;

  // True when some stored point lies within sqrt(radius_sq) (inclusive).
  bool any_within(const Eigen::Vector3d& query, double radius_sq) const;

 private:
  struct Node {
    Eigen::Vector3d point;
    int axis = 0;
    int left = -1, right = -1;
  };

  int build(std::vector<Eigen::Vector3d>& pts, int begin, int end, int depth);
  void search(int node, const Eigen::Vector3d& q, double& best) const;
  bool within(int node, const Eigen::Vector3d& q, double radius_sq) const;

  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace pcdgen
