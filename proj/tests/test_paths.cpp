// Copyright 2026 The stripfold Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stripfold/paths.hpp"

namespace stripfold {
namespace {

constexpr double kL = 0.6;

TEST(PathsTest, TriangularGeometry) {
  const GripperPath path = triangular_path(kL);
  EXPECT_EQ(path.segments().size(), 2u);
  EXPECT_LT((path.at(0.0) - Vec2(0.6, 0.0)).norm(), 1e-12);
  EXPECT_LT((path.at(path.total_length() / 2) - Vec2(0.3, 0.3)).norm(), 1e-12);
  EXPECT_LT((path.at(path.total_length()) - Vec2(0.0, 0.0)).norm(), 1e-12);
  EXPECT_NEAR(path.total_length(), kL * std::sqrt(2.0), 1e-12);
}

TEST(PathsTest, CircularGeometry) {
  const GripperPath path = circular_path(kL);
  EXPECT_NEAR(path.total_length(), std::numbers::pi * kL / 2, 1e-12);
  EXPECT_LT((path.at(path.total_length() / 2) - Vec2(0.3, 0.3)).norm(), 1e-12);
  for (const Vec2& w : path.waypoints(50)) {
    EXPECT_NEAR((w - Vec2(0.3, 0.0)).norm(), 0.3, 1e-12);
  }
}

TEST(PathsTest, EndpointsAreExact) {
  for (double L : {0.6, 0.25, 1.7}) {
    for (const GripperPath& path : {triangular_path(L), circular_path(L)}) {
      EXPECT_LT((path.at(0.0) - Vec2(L, 0.0)).norm(), 1e-12);
      EXPECT_LT((path.at(path.total_length()) - Vec2(0.0, 0.0)).norm(), 1e-12);
      EXPECT_LT((path.end() - Vec2(0.0, 0.0)).norm(), 1e-12);
    }
  }
}

TEST(PathsTest, ArcLengthParameterization) {
  for (const GripperPath& path : {triangular_path(kL), circular_path(kL)}) {
    const int n = 997;
    const double ds = path.total_length() / n;
    double walked = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec2 a = path.at(i * ds);
      const Vec2 b = path.at((i + 1) * ds);
      EXPECT_GE(a.y(), -1e-15);
      EXPECT_LE((b - a).norm(), ds * (1 + 1e-9));
      walked += (b - a).norm();
    }
    // Chords fall short of the arc by O(ds^2) and cut the apex corner by
    // less than one step.
    EXPECT_LE(walked, path.total_length() + 1e-12);
    EXPECT_GT(walked, path.total_length() - 0.5 * ds);
  }
}

TEST(PathsTest, ParameterIsClamped) {
  const GripperPath path = triangular_path(kL);
  EXPECT_EQ(path.at(-1.0), path.at(0.0));
  EXPECT_EQ(path.at(10.0), path.at(path.total_length()));
}

TEST(PathsTest, BuilderMixesLinesAndArcs) {
  GripperPath path(Vec2(1.0, 0.0));
  path.line_to(Vec2(1.0, 1.0)).arc_around(Vec2(0.0, 1.0), std::numbers::pi / 2);
  EXPECT_NEAR(path.total_length(), 1.0 + std::numbers::pi / 2, 1e-12);
  EXPECT_LT((path.end() - Vec2(0.0, 2.0)).norm(), 1e-12);
  EXPECT_LT((path.at(0.5) - Vec2(1.0, 0.5)).norm(), 1e-12);
  const Vec2 mid = path.at(1.0 + std::numbers::pi / 4);
  EXPECT_NEAR(mid.x(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(mid.y(), 1.0 + std::sqrt(0.5), 1e-12);
}

TEST(PathsTest, ZeroLengthPathDoesNotTouch) {
  const StripParams p = StripParams::desk_scale();
  const EpisodeResult r = run_path(GripperPath(Vec2(kL, 0.0)), p);
  EXPECT_FALSE(r.touched);
  EXPECT_FALSE(r.failed);
}

TEST(PathsTest, RejectsSpeedAboveClamp) {
  const StripParams p = StripParams::desk_scale();
  EXPECT_THROW(run_path(triangular_path(kL), p, 2 * p.max_gripper_speed),
               std::invalid_argument);
  EXPECT_THROW(run_path(triangular_path(kL), p, 0.0), std::invalid_argument);
}

TEST(PathsTest, RunPathIsDeterministic) {
  const StripParams p = StripParams::desk_scale().with_material(0.1, 5 * damping_min(0.1));
  const EpisodeResult a = run_path(circular_path(kL), p);
  const EpisodeResult b = run_path(circular_path(kL), p);
  EXPECT_EQ(a.d, b.d);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(a.force_trace, b.force_trace);
  EXPECT_EQ(a.total_reward, b.total_reward);
}

TEST(PathsTest, BaselineSignsAtPriorCorners) {
  const StripParams base = StripParams::desk_scale();
  for (double k : {kStiffnessMin, kStiffnessMax}) {
    for (double ratio : {1.0, kDampingSpan}) {
      const StripParams p = base.with_material(k, ratio * damping_min(k));
      const EpisodeResult tri = run_path(triangular_path(kL), p);
      const EpisodeResult circ = run_path(circular_path(kL), p);
      ASSERT_TRUE(tri.touched);
      ASSERT_TRUE(circ.touched);
      EXPECT_LT(tri.d, 0.0) << "k = " << k << " ratio = " << ratio;
      EXPECT_GT(circ.d, 0.0) << "k = " << k << " ratio = " << ratio;
      EXPECT_EQ(tri.total_reward, tri.intermediate_reward_sum + tri.terminal_reward);
    }
  }
}

}  // namespace
}  // namespace stripfold
