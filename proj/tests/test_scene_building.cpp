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

#include <map>
#include <random>
#include <set>

#include "lidarsyn/scene/accumulate.hpp"
#include "lidarsyn/scene/ball_pivoting.hpp"
#include "lidarsyn/testbed/scene.hpp"
#include "lidarsyn/testbed/simulate.hpp"
#include "support.hpp"

using namespace lidarsyn;

namespace {

FusedCloud fused_of(std::vector<Point3> pts) {
  FusedCloud f;
  f.cloud.points = std::move(pts);
  f.cloud.frame = Frame::kWorld;
  return f;
}

BpaConfig single_radius(double r) {
  BpaConfig cfg;
  cfg.radii = {r};
  cfg.dedup_voxel = 0.0;
  return cfg;
}

void expect_manifold(const TriangleMesh& mesh) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  std::set<std::array<std::uint32_t, 3>> faces;
  for (const auto& t : mesh.triangles) {
    auto key = t;
    std::sort(key.begin(), key.end());
    EXPECT_TRUE(faces.insert(key).second) << "duplicate triangle";
    for (int e = 0; e < 3; ++e) {
      const auto a = t[e], b = t[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [edge, count] : edges) EXPECT_LE(count, 2);
}

}  // namespace

TEST(Accumulate, SingleScanIdentity) {
  io::ScanSequence seq;
  seq.scans = {PointCloud{{Point3(1, 2, 3), Point3(-4, 5, 6)}}};
  Trajectory traj{{PoseSE3::identity()}};
  EXPECT_EQ(accumulate(seq, traj).cloud.points, seq.scans[0].points);
}

TEST(Accumulate, HandComputedInverse) {
  io::ScanSequence seq;
  seq.scans = {PointCloud{{Point3(5, 0, 0)}}, PointCloud{{Point3(5, 0, 0)}}};
  Trajectory traj{{PoseSE3::identity(), PoseSE3::from_translation({1, 0, 0})}};
  const auto fused = accumulate(seq, traj);
  ASSERT_EQ(fused.cloud.size(), 2u);
  EXPECT_EQ(fused.cloud.points[0], Point3(5, 0, 0));
  EXPECT_EQ(fused.cloud.points[1], Point3(4, 0, 0));
  EXPECT_EQ(fused.source_timestep, (std::vector<std::uint32_t>{0, 1}));
}

TEST(Accumulate, QuarterTurnIsExact) {
  // R = yaw 90 degrees written with exact entries.
  Mat3 r;
  r << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  io::ScanSequence seq;
  seq.scans = {PointCloud{{Point3(2, 3, 4)}}};
  Trajectory traj{{PoseSE3(r, Vec3(1, 1, 0))}};
  // R^T (p - t) = R^T (1, 2, 4) = (2, -1, 4).
  EXPECT_EQ(accumulate(seq, traj).cloud.points[0], Point3(2, -1, 4));
}

TEST(Accumulate, CardinalityAndMismatch) {
  std::mt19937_64 rng(51);
  io::ScanSequence seq;
  Trajectory traj;
  std::size_t total = 0;
  for (int i = 0; i < 7; ++i) {
    seq.scans.push_back(PointCloud{test::random_points(rng, 10 + i)});
    traj.poses.push_back(test::random_pose(rng));
    total += 10 + i;
  }
  EXPECT_EQ(accumulate(seq, traj, 3).cloud.size(), total);
  EXPECT_EQ(accumulate(seq, traj, 3).cloud.points, accumulate(seq, traj, 1).cloud.points);
  traj.poses.pop_back();
  EXPECT_THROW(accumulate(seq, traj), Error);
}

TEST(Accumulate, TestbedFusedCloudLiesOnSurfaces) {
  const auto scene = testbed::generate_scene({});
  NoiseConfig off;
  off.sigma = 0.0;
  off.drop_probability = 0.0;
  const auto seq = testbed::simulate_sequence(scene, default_beam_model(256, 16), off);
  const auto fused = accumulate(seq, scene.ground_truth);
  std::vector<double> d;
  for (std::size_t i = 0; i < fused.cloud.size(); i += 7) d.push_back(scene.analytic_distance(fused.cloud.points[i]));
  std::sort(d.begin(), d.end());
  EXPECT_LT(d[d.size() * 95 / 100], 0.02);
}

TEST(BallPivoting, SingleTriangle) {
  const auto mesh = reconstruct_mesh(fused_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}), single_radius(1.0));
  ASSERT_EQ(mesh.triangles.size(), 1u);
}

TEST(BallPivoting, PlanarGridCount) {
  for (auto [n, m] : {std::pair{5, 7}, std::pair{12, 9}, std::pair{30, 20}}) {
    std::vector<Point3> pts;
    const double s = 0.1;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) pts.push_back({i * s, j * s, 0.0});
    }
    const auto mesh = reconstruct_mesh(fused_of(pts), single_radius(1.5 * s));
    EXPECT_EQ(mesh.triangles.size(), static_cast<std::size_t>(2 * (n - 1) * (m - 1))) << n << "x" << m;
    expect_manifold(mesh);
  }
}

TEST(BallPivoting, VerticesAreInputPoints) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.0, 4.0), z(-0.01, 0.01);
  std::vector<Point3> pts;
  for (int i = 0; i < 3000; ++i) pts.push_back({u(rng), u(rng), z(rng)});
  BpaConfig cfg;
  cfg.dedup_voxel = 0.0;
  cfg.radii = {0.1, 0.2};
  const auto mesh = reconstruct_mesh(fused_of(pts), cfg);
  ASSERT_EQ(mesh.vertices.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_EQ(mesh.vertices[i], pts[i]);
  expect_manifold(mesh);
  EXPECT_GT(mesh.triangles.size(), 4000u);
}

TEST(BallPivoting, DedupKeepsFirstPointPerVoxel) {
  const std::vector<Point3> pts = {{0.01, 0.01, 0}, {0.02, 0.02, 0}, {0.07, 0.0, 0}, {0.011, 0.012, 0.001}};
  const auto out = voxel_dedup(pts, 0.05);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], pts[0]);
  EXPECT_EQ(out[1], pts[2]);
  EXPECT_EQ(voxel_dedup(pts, 0.0), pts);
}

TEST(BallPivoting, EmptyMeshWhenNothingFits) {
  try {
    reconstruct_mesh(fused_of({{0, 0, 0}, {10, 0, 0}, {0, 10, 0}, {10, 10, 0.5}}), single_radius(0.1));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMesh);
  }
}

TEST(BallPivoting, RejectsBadConfig) {
  BpaConfig cfg;
  cfg.radii = {0.4, 0.2};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.radii = {};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.radii = {0.1};
  cfg.dedup_voxel = -1;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(BallPivoting, TestbedMeshIsManifoldAndPreservesVertices) {
  const auto scene = testbed::generate_scene({});
  NoiseConfig off;
  off.sigma = 0.0;
  off.drop_probability = 0.0;
  const auto seq = testbed::simulate_sequence(scene, default_beam_model(512, 32), off);
  io::ScanSequence sub;
  Trajectory traj;
  std::vector<Point3> views;
  for (std::size_t i = 0; i < seq.size(); i += 10) {
    sub.scans.push_back(seq.scans[i]);
    traj.poses.push_back(scene.ground_truth[i]);
    views.push_back(scene.ground_truth[i].origin_in_world());
  }
  const auto fused = accumulate(sub, traj);
  BpaConfig cfg;
  cfg.dedup_voxel = 0.0;
  const auto mesh = reconstruct_mesh(fused, cfg, views);
  ASSERT_EQ(mesh.vertices.size(), fused.cloud.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) ASSERT_EQ(mesh.vertices[i], fused.cloud.points[i]);
  expect_manifold(mesh);
}

TEST(Normals, GroundUpAndWallsFaceViewpoint) {
  std::vector<Point3> pts;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      pts.push_back({i * 0.1, j * 0.1, 0.0});       // ground
      pts.push_back({i * 0.1, 5.0, 1.0 + j * 0.1});  // wall at y = 5
    }
  }
  const KdIndex index(pts);
  const auto normals = estimate_normals(index, 16, {Point3(1, 0, 1.5)});
  for (std::size_t i = 0; i < pts.size(); i += 2) {
    EXPECT_NEAR(normals[i].z(), 1.0, 1e-9);
    EXPECT_NEAR(normals[i + 1].y(), -1.0, 1e-9);
  }
}
