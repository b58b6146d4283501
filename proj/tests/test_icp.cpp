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

#include <numbers>
#include <random>

#include "lidarsyn/odometry/icp.hpp"
#include "support.hpp"

using namespace lidarsyn;

namespace {

// Points on the faces of a few randomly placed boxes and a floor: enough
// structure to pin down all six degrees of freedom.
PointCloud box_world(std::uint64_t seed, double spacing = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-6.0, 6.0), size(0.5, 2.5), yaw(0.0, std::numbers::pi);
  PointCloud cloud;
  // Jittered samples: a regular lattice would align with itself at every
  // multiple of its spacing and give ICP exact false minima.
  std::uniform_real_distribution<double> jitter(0.0, spacing), floor(-8.0, 8.0);
  const int floor_points = static_cast<int>(16.0 * 16.0 / (4 * spacing * spacing));
  for (int i = 0; i < floor_points; ++i) cloud.points.push_back({floor(rng), floor(rng), 0.0});
  for (int b = 0; b < 6; ++b) {
    const Vec3 half(size(rng) / 2, size(rng) / 2, size(rng) / 2);
    const PoseSE3 place = PoseSE3::from_yaw(yaw(rng), Vec3(pos(rng), pos(rng), half.z()));
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      for (double sgn : {-1.0, 1.0}) {
        for (double a = -half[u]; a <= half[u]; a += spacing) {
          for (double c = -half[v]; c <= half[v]; c += spacing) {
            Vec3 p;
            p[axis] = sgn * half[axis];
            p[u] = std::min(a + jitter(rng), half[u]);
            p[v] = std::min(c + jitter(rng), half[v]);
            cloud.points.push_back(place.apply(p));
          }
        }
      }
    }
  }
  return cloud;
}

IcpConfig fine_config() {
  IcpConfig cfg;
  cfg.voxel_size = 1e-4;  // keeps every point
  cfg.max_iterations = 200;
  cfg.convergence_threshold = 1e-12;
  return cfg;
}

}  // namespace

TEST(Icp, SelfAlignmentIsIdentity) {
  const PointCloud c = box_world(1);
  const auto r = icp_align(c, c, PoseSE3::identity(), IcpConfig{});
  EXPECT_LT((r.pose.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(r.pose.translation().norm(), 1e-9);
  EXPECT_LT(r.residual, 1e-9);
}

TEST(Icp, RecoversKnownTranslation) {
  const PointCloud src = box_world(2);
  const PoseSE3 truth = PoseSE3::from_translation({1.0, 0.2, 0.0});
  const PointCloud tgt = transform_cloud(src, truth, Direction::kForward);
  const auto r = icp_align(src, tgt, PoseSE3::identity(), fine_config());
  EXPECT_LT((r.pose.translation() - truth.translation()).norm(), 1e-3);
}

TEST(Icp, RecoversKnownRotationAndTranslation) {
  const PointCloud src = box_world(3);
  const PoseSE3 truth = PoseSE3::from_yaw(5.0 * std::numbers::pi / 180.0, {0.5, 0.0, 0.0});
  const PointCloud tgt = transform_cloud(src, truth, Direction::kForward);
  const auto r = icp_align(src, tgt, PoseSE3::identity(), fine_config());
  EXPECT_LT(PoseSE3::rotation_angle_between(r.pose, truth) * 180.0 / std::numbers::pi, 0.1);
  EXPECT_LT((r.pose.translation() - truth.translation()).norm(), 1e-2);
}

TEST(Icp, ResidualNeverIncreases) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const PointCloud src = box_world(seed + 10, 0.2);
    const PoseSE3 truth = PoseSE3::from_yaw(0.1 * (seed % 3), Vec3(0.3 * (seed % 4), 0.2, 0.05));
    PointCloud tgt = transform_cloud(src, truth, Direction::kForward);
    std::normal_distribution<double> n(0.0, 0.02);
    for (auto& p : tgt.points) p += Vec3(n(rng), n(rng), n(rng));
    IcpConfig cfg;
    cfg.convergence_threshold = 1e-9;
    const auto r = icp_align(src, tgt, PoseSE3::identity(), cfg);
    ASSERT_GE(r.residual_history.size(), 2u);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
      EXPECT_LE(r.residual_history[i], r.residual_history[i - 1] + 1e-12) << "seed " << seed << " step " << i;
    }
  }
}

TEST(Icp, EquivariantUnderCommonRigidMotion) {
  const PointCloud src = box_world(4, 0.15);
  const PoseSE3 truth = PoseSE3::from_yaw(0.05, {0.4, -0.1, 0.02});
  const PointCloud tgt = transform_cloud(src, truth, Direction::kForward);
  std::mt19937_64 rng(5);
  const PoseSE3 g = test::random_pose(rng, 3.0);
  const IcpConfig cfg = fine_config();
  const auto a = icp_align(src, tgt, PoseSE3::identity(), cfg);
  const auto b = icp_align(transform_cloud(src, g, Direction::kForward), transform_cloud(tgt, g, Direction::kForward),
                           PoseSE3::identity(), cfg);
  const PoseSE3 expected = g * a.pose * g.inverse();
  EXPECT_LT((b.pose.rotation() - expected.rotation()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((b.pose.translation() - expected.translation()).norm(), 1e-6);
}

TEST(Icp, TooFewCorrespondencesIsDegenerate) {
  PointCloud a{{Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)}};
  PointCloud b = transform_cloud(a, PoseSE3::from_translation({50, 0, 0}), Direction::kForward);
  try {
    icp_align(a, b, PoseSE3::identity(), IcpConfig{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateGeometry);
  }
}

TEST(Icp, FitRigidIsExactOnNoiseFreePairs) {
  std::mt19937_64 rng(6);
  const auto src = test::random_points(rng, 50);
  const PoseSE3 truth = test::random_pose(rng);
  std::vector<Point3> dst;
  for (const auto& p : src) dst.push_back(truth.apply(p));
  const PoseSE3 fit = fit_rigid(src, dst);
  EXPECT_LT((fit.rotation() - truth.rotation()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((fit.translation() - truth.translation()).norm(), 1e-9);
  EXPECT_TRUE(fit.is_valid());
}

TEST(Icp, VoxelDownsampleTakesCentroids) {
  const std::vector<Point3> pts = {{0.1, 0.1, 0.1}, {0.3, 0.1, 0.1}, {1.1, 0, 0}, {0.2, 0.4, 0.1}};
  const auto out = voxel_downsample(pts, 0.5);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_LT((out[0] - Point3(0.2, 0.2, 0.1)).norm(), 1e-15);
  EXPECT_EQ(out[1], Point3(1.1, 0, 0));
}

TEST(Trajectory, IdenticalScansGiveIdentityPoses) {
  io::ScanSequence seq;
  const PointCloud c = box_world(7, 0.2);
  for (int i = 0; i < 5; ++i) seq.scans.push_back(c);
  const auto traj = estimate_trajectory(seq, IcpConfig{});
  ASSERT_EQ(traj.size(), 5u);
  EXPECT_TRUE(traj[0] == PoseSE3::identity());
  for (const auto& p : traj.poses) {
    EXPECT_LT((p.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(p.translation().norm(), 1e-9);
  }
}

TEST(Trajectory, RecoversSmallMotionChain) {
  // World-to-sensor poses of a sensor moving 0.3 m per step and yawing.
  const PointCloud world = box_world(8, 0.1);
  io::ScanSequence seq;
  Trajectory truth;
  for (int i = 0; i < 6; ++i) {
    const PoseSE3 sensor_to_world = PoseSE3::from_yaw(0.02 * i, Vec3(0.3 * i, 0.05 * i, 0));
    truth.poses.push_back(sensor_to_world.inverse());
    seq.scans.push_back(transform_cloud(world, truth.poses.back(), Direction::kForward));
  }
  const auto traj = estimate_trajectory(seq, fine_config());
  EXPECT_TRUE(traj[0] == PoseSE3::identity());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    EXPECT_LT((traj[i].origin_in_world() - truth[i].origin_in_world()).norm(), 1e-3) << i;
  }
}

TEST(Trajectory, FailureNamesThePair) {
  io::ScanSequence seq;
  const PointCloud c = box_world(9, 0.3);
  seq.scans = {c, c, PointCloud{}};
  try {
    estimate_trajectory(seq, IcpConfig{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("scan 2 onto scan 1"), std::string::npos) << e.what();
  }
}

TEST(Trajectory, NeedsTwoScans) {
  io::ScanSequence seq;
  seq.scans = {box_world(10, 0.3)};
  EXPECT_THROW(estimate_trajectory(seq, IcpConfig{}), Error);
}
