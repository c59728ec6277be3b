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

#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "pcdgen/kdtree.hpp"

namespace pcdgen {
namespace {

double brute_nearest_sq(const Points& pts, const Eigen::Vector3d& q) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    best = std::min(best, (pts.row(i).transpose().cast<double>() - q).squaredNorm());
  return best;
}

TEST(KdTree, NearestMatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int n : {1, 2, 7, 100, 2000}) {
    Points pts(n, 3);
    for (int i = 0; i < n; ++i) pts.row(i) << float(u(rng)), float(u(rng)), float(u(rng));
    const KdTree tree(pts);
    for (int q = 0; q < 300; ++q) {
      const Eigen::Vector3d query(u(rng) * 1.5, u(rng) * 1.5, u(rng) * 1.5);
      const double expect = brute_nearest_sq(pts, query);
      EXPECT_DOUBLE_EQ(tree.nearest_squared_distance(query), expect);
      const double r = std::abs(u(rng)) * 0.2;
      EXPECT_EQ(tree.any_within(query, r * r), expect <= r * r);
    }
  }
}

TEST(KdTree, DuplicatePointsAndEmptyTree) {
  Points pts = Points::Zero(50, 3);
  const KdTree tree(pts);
  EXPECT_DOUBLE_EQ(tree.nearest_squared_distance({0, 0, 1}), 1.0);
  EXPECT_TRUE(tree.any_within({0, 0, 0}, 0.0));
  const KdTree empty{Points(0, 3)};
  EXPECT_TRUE(empty.empty());
  EXPECT_FALSE(empty.any_within({0, 0, 0}, 1.0));
}

}  // namespace
}  // namespace pcdgen
