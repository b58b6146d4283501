// Copyright 2026 The lidarsyn Authors
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

#include <random>

#include "lidarsyn/labels/cubic_spline.hpp"
#include "lidarsyn/labels/waypoints.hpp"
#include "lidarsyn/synthesis/viewpoints.hpp"
#include "support.hpp"

using namespace lidarsyn;

namespace {

// Sensor at x = i facing +x, one pose per meter.
Trajectory straight(int n) {
  Trajectory t;
  for (int i = 0; i < n; ++i) t.poses.push_back(PoseSE3::from_translation({-static_cast<double>(i), 0, 0}));
  return t;
}

// Constant-curvature left-hand turn (toward -y) of radius r, unit arc spacing.
Trajectory arc(int n, double r) {
  Trajectory t;
  for (int i = 0; i < n; ++i) {
    const double h = -i / r;  // heading, negative is a turn toward -y
    const Vec3 c(r * std::sin(-h), -r * (1 - std::cos(h)), 0.0);
    t.poses.push_back(PoseSE3::from_yaw(h, c).inverse());
  }
  return t;
}

Trajectory moved(const Trajectory& t, const PoseSE3& g) {
  // Applying g to the world changes every world-to-sensor pose T to T g^-1.
  Trajectory out;
  for (const auto& p : t.poses) out.poses.push_back(p * g.inverse());
  return out;
}

void expect_label_near(const WaypointLabel& a, const WaypointLabel& b, double tol) {
  for (int k = 0; k < 4; ++k) EXPECT_LT((a[k] - b[k]).norm(), tol) << "waypoint " << k;
}

}  // namespace

TEST(Spline, PassesThroughKnots) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<double> x{0.0, 3.0, 4.0};
    const std::vector<double> y{0.0, u(rng), u(rng)};
    const NaturalCubicSpline s(x, y);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(s(x[k]), y[k], 1e-12);
  }
}

TEST(Spline, NaturalEndsAndLinearData) {
  const NaturalCubicSpline s({0, 1, 2.5, 4}, {1, 3, 6, 9});
  EXPECT_EQ(s.second_derivatives().front(), 0.0);
  EXPECT_EQ(s.second_derivatives().back(), 0.0);
  const NaturalCubicSpline line({0, 3, 4}, {0, 15, 20});
  EXPECT_NEAR(line(1.0), 5.0, 1e-12);
  EXPECT_NEAR(line(2.0), 10.0, 1e-12);
  EXPECT_THROW(NaturalCubicSpline({0, 0}, {1, 2}), Error);
  EXPECT_THROW(NaturalCubicSpline({0}, {1}), Error);
}

TEST(Spline, ThreeKnotValuesByHand) {
  // Knots (0,0), (3,-2), (4,-2): (4/3) m = 2/3 gives m = 1/2 at the interior
  // knot, and on [0, 3] y(x) = x^3/36 - 11x/12.
  const NaturalCubicSpline s({0, 3, 4}, {0, -2, -2});
  EXPECT_NEAR(s.second_derivatives()[1], 0.5, 1e-15);
  EXPECT_NEAR(s(1.0), -8.0 / 9.0, 1e-12);
  EXPECT_NEAR(s(2.0), -29.0 / 18.0, 1e-12);
}

TEST(ReferenceLabel, StraightLine) {
  const auto l = reference_label(straight(30), 0, LabelConfig{});
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(l[k].x(), 5.0 * (k + 1), 1e-12);
    EXPECT_NEAR(l[k].y(), 0.0, 1e-12);
  }
}

TEST(ReferenceLabel, StaticTrajectory) {
  Trajectory t;
  t.poses.assign(25, PoseSE3::from_yaw(0.4, {1, 2, 3}));
  const auto l = reference_label(t, 2, LabelConfig{});
  for (int k = 0; k < 4; ++k) EXPECT_LT(l[k].norm(), 1e-12);
}

TEST(ReferenceLabel, ArcWaypointsLieOnCircle) {
  const double r = 50.0;
  const auto t = arc(40, r);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto l = reference_label(t, i, LabelConfig{});
    // In the sensor frame the circle is centered at (0, -r).
    for (int k = 0; k < 4; ++k) EXPECT_NEAR((l[k] - Vec2(0, -r)).norm(), r, 1e-9);
  }
}

TEST(ReferenceLabel, OutOfRange) {
  try {
    reference_label(straight(20), 0, LabelConfig{});
    FAIL() << "expected a range error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
  EXPECT_EQ(labelable_count(50, LabelConfig{}), 30u);
  EXPECT_EQ(labelable_count(20, LabelConfig{}), 0u);
}

TEST(OffsetLabel, ZeroOffsetAgreesWithReferenceOnStraightLine) {
  const auto t = straight(30);
  const auto ref = reference_label(t, 3, LabelConfig{});
  const auto off = offset_label(t, 3, lateral_offset_pose(t[3], 0.0), LabelConfig{});
  EXPECT_EQ(off[2], ref[2]);
  EXPECT_EQ(off[3], ref[3]);
  expect_label_near(off, ref, 1e-12);
}

TEST(OffsetLabel, PlusTwoMetersOnStraightLine) {
  const auto t = straight(30);
  const auto l = offset_label(t, 0, lateral_offset_pose(t[0], 2.0), LabelConfig{});
  EXPECT_LT((l[2] - Vec2(15, -2)).norm(), 1e-12);
  EXPECT_LT((l[3] - Vec2(20, -2)).norm(), 1e-12);
  EXPECT_NEAR(l[0].y(), -8.0 / 9.0, 1e-12);
  EXPECT_NEAR(l[1].y(), -29.0 / 18.0, 1e-12);
  EXPECT_NEAR(l[0].x(), 5.0, 1e-12);
  EXPECT_NEAR(l[1].x(), 10.0, 1e-12);
  // Distance to the reference line shrinks monotonically along the label.
  double prev = 2.0;
  for (int k = 0; k < 4; ++k) {
    const double gap = std::abs(l[k].y() + 2.0);
    EXPECT_LE(gap, prev + 1e-12);
    prev = gap;
  }
}

TEST(OffsetLabel, StaticTrajectoryUsesLinearRule) {
  Trajectory t;
  t.poses.assign(25, PoseSE3::identity());
  const auto l = offset_label(t, 0, lateral_offset_pose(t[0], 1.0), LabelConfig{});
  EXPECT_EQ(l[2], Vec2(0, -1));
  EXPECT_EQ(l[3], Vec2(0, -1));
  EXPECT_LT((l[0] - Vec2(0, -1.0 / 3.0)).norm(), 1e-15);
  EXPECT_LT((l[1] - Vec2(0, -2.0 / 3.0)).norm(), 1e-15);
}

TEST(OffsetLabel, ContinuousAsOffsetVanishes) {
  for (const auto& t : {straight(30), arc(30, 40.0)}) {
    const auto at_zero = offset_label(t, 2, t[2], LabelConfig{});
    for (double o : {1e-3, 1e-6}) {
      const auto l = offset_label(t, 2, lateral_offset_pose(t[2], o), LabelConfig{});
      expect_label_near(l, at_zero, 2.0 * o);
    }
  }
}

TEST(Labels, RigidInvariance) {
  std::mt19937_64 rng(62);
  const auto base = arc(40, 35.0);
  for (int trial = 0; trial < 20; ++trial) {
    const PoseSE3 g = PoseSE3::from_yaw(std::uniform_real_distribution<double>(-3, 3)(rng),
                                        test::random_points(rng, 1, -100, 100)[0]);
    const auto t = moved(base, g);
    for (std::size_t i : {0u, 7u, 15u}) {
      expect_label_near(reference_label(t, i, LabelConfig{}), reference_label(base, i, LabelConfig{}), 1e-9);
      expect_label_near(offset_label(t, i, lateral_offset_pose(t[i], 1.6), LabelConfig{}),
                        offset_label(base, i, lateral_offset_pose(base[i], 1.6), LabelConfig{}), 1e-9);
    }
  }
}

TEST(Labels, CurrentPoseMapsToOrigin) {
  const auto t = arc(30, 20.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Vec3 p = t[i].apply(t[i].origin_in_world());
    EXPECT_LT(p.head<2>().norm(), 1e-9);
  }
}

TEST(Labels, FrameSkipValidation) {
  LabelConfig cfg;
  cfg.frame_skip = 0;
  EXPECT_THROW(reference_label(straight(30), 0, cfg), Error);
}
