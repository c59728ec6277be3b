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

#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "pcdgen/motion_planner.hpp"

namespace pcdgen {
namespace {

Pose rz(double angle, const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
  return make_pose(Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix(), t);
}

bool bit_equal(const Pose& a, const Pose& b) {
  return std::memcmp(a.matrix().data(), b.matrix().data(), sizeof(double) * 16) == 0;
}

double angle_between(const Pose& a, const Pose& b) {
  return Eigen::AngleAxisd(a.linear().transpose() * b.linear()).angle();
}

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0, 1);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return make_pose(q.toRotationMatrix(), 0.2 * Eigen::Vector3d(n(rng), n(rng), n(rng)));
}

TEST(Motion, DegenerateStartEqualsGoal) {
  const Pose p = rz(0.3, {0.1, 0.2, 0.9});
  const std::vector<float> grips = {0.08f, 0.08f, 0.02f};
  const PlannedMotion m = plan_motion(p, p, grips, {});
  ASSERT_EQ(m.poses.size(), 2u);
  EXPECT_TRUE(bit_equal(m.poses[0], p));
  EXPECT_TRUE(bit_equal(m.poses[1], p));
  EXPECT_EQ(m.grips, (std::vector<float>{0.08f, 0.02f}));
}

TEST(Motion, PureTranslationRespectsStep) {
  MotionOptions opt;
  opt.step = 0.05;
  const Pose a = rz(0, {0, 0, 1}), b = rz(0, {0.2, 0, 1});
  const std::vector<float> grips = {0.08f, 0.08f};
  const PlannedMotion m = plan_motion(a, b, grips, opt);
  EXPECT_GE(m.poses.size(), 5u);
  EXPECT_TRUE(bit_equal(m.poses.front(), a));
  EXPECT_TRUE(bit_equal(m.poses.back(), b));
  for (std::size_t j = 1; j < m.poses.size(); ++j)
    EXPECT_LE((m.poses[j].translation() - m.poses[j - 1].translation()).norm(), opt.step + 1e-9);
}

TEST(Motion, ZRotationGeodesicOracle) {
  // Ten waypoints: nine equal steps over a quarter turn.
  const Pose a = rz(0), b = rz(M_PI / 2);
  const auto path = interpolate_motion(a, b, 10, {});
  ASSERT_EQ(path.size(), 10u);
  for (int j = 0; j < 10; ++j) {
    const Eigen::Matrix3d expect = Eigen::AngleAxisd(j * M_PI / 18, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    EXPECT_LE((path[j].linear() - expect).cwiseAbs().maxCoeff(), 1e-9) << "waypoint " << j;
  }
}

TEST(Motion, LiftTransitDescend) {
  MotionOptions opt;
  opt.lift = 0.05;
  opt.up = Eigen::Vector3d(0, 0, -1);
  const Pose a = rz(0, {0, 0, 1}), b = rz(0, {0.3, 0, 1});
  const auto path = interpolate_motion(a, b, waypoint_count(a, b, opt), opt);
  double highest = 0;
  for (const Pose& p : path) {
    const double h = (p.translation() - a.translation()).dot(opt.up);
    EXPECT_GE(h, -1e-12);
    EXPECT_LE(h, opt.lift + 1e-12);
    highest = std::max(highest, h);
  }
  EXPECT_NEAR(highest, opt.lift, 1e-12);
  // Without lift the path is the straight segment.
  opt.lift = 0;
  for (const Pose& p : interpolate_motion(a, b, 7, opt)) EXPECT_NEAR(p.translation().y(), 0, 1e-12);
}

TEST(Motion, RandomPairsBoundsAndMonotoneRotation) {
  std::mt19937_64 rng(9);
  MotionOptions opt;
  for (int trial = 0; trial < 200; ++trial) {
    const Pose a = random_pose(rng), b = random_pose(rng);
    const int n = waypoint_count(a, b, opt);
    const auto path = interpolate_motion(a, b, n, opt);
    ASSERT_EQ(static_cast<int>(path.size()), n);
    EXPECT_TRUE(bit_equal(path.front(), a));
    EXPECT_TRUE(bit_equal(path.back(), b));
    double last_angle = 0;
    for (int j = 1; j < n; ++j) {
      EXPECT_LE((path[j].translation() - path[j - 1].translation()).norm(), opt.step + 1e-9);
      EXPECT_LE(angle_between(path[j - 1], path[j]), opt.angle_step + 1e-9);
      const double from_start = angle_between(a, path[j]);
      EXPECT_GE(from_start, last_angle - 1e-9);
      last_angle = from_start;
    }
  }
}

TEST(Motion, GripResamplingKeepsTransitionOrder) {
  const std::vector<float> src = {0.08f, 0.08f, 0.08f, 0.02f, 0.02f, 0.02f, 0.02f};
  for (int count : {2, 3, 5, 17, 60}) {
    const auto idx = resample_indices(static_cast<int>(src.size()), count);
    ASSERT_EQ(static_cast<int>(idx.size()), count);
    EXPECT_EQ(idx.front(), 0);
    EXPECT_EQ(idx.back(), static_cast<int>(src.size()) - 1);
    int transitions = 0;
    for (int j = 1; j < count; ++j) {
      EXPECT_GE(idx[j], idx[j - 1]);
      transitions += src[idx[j]] != src[idx[j - 1]];
    }
    EXPECT_EQ(transitions, 1);
  }
}

}  // namespace
}  // namespace pcdgen
