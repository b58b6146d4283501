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

#include "lidarsyn/io/sequence.hpp"
#include "lidarsyn/io/trajectory_file.hpp"
#include "support.hpp"

using namespace lidarsyn;

TEST(Manifest, RoundTripAndRelativePaths) {
  test::TempDir dir("manifest");
  std::filesystem::create_directories(dir / "scans");
  io::write_cloud(PointCloud{{Point3(1, 2, 3)}}, dir / "scans/a.ply");
  io::write_cloud(PointCloud{{Point3(4, 5, 6), Point3(7, 8, 9)}}, dir / "scans/b.ply");
  io::SequenceManifest m;
  m.frequency_hz = 20.0;
  m.sensor_preset = "low_res";
  m.scan_paths = {"scans/a.ply", "scans/b.ply"};
  io::write_manifest(m, dir / "manifest.txt");

  const auto back = io::read_manifest(dir / "manifest.txt");
  EXPECT_EQ(back.frequency_hz, 20.0);
  EXPECT_EQ(back.sensor_preset, "low_res");
  ASSERT_EQ(back.scan_paths.size(), 2u);
  EXPECT_EQ(back.scan_paths[0], dir / "scans/a.ply");
  const auto seq = io::load_sequence(back);
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq.frequency_hz, 20.0);
  EXPECT_EQ(seq.scans[1].points[1], Point3(7, 8, 9));
}

TEST(Manifest, MissingScanIsNamed) {
  test::TempDir dir("manifest");
  test::spit(dir / "manifest.txt", "frequency_hz=10\ngone.ply\n");
  try {
    io::read_manifest(dir / "manifest.txt");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("gone.ply"), std::string::npos);
  }
}

TEST(Manifest, HeaderIsRequired) {
  test::TempDir dir("manifest");
  test::spit(dir / "m1.txt", "scan.ply\n");
  test::spit(dir / "m2.txt", "frequency_hz=abc\n");
  test::spit(dir / "m3.txt", "frequency_hz=-1\n");
  test::spit(dir / "m4.txt", "# only a comment\n");
  for (const char* name : {"m1.txt", "m2.txt", "m3.txt", "m4.txt"}) {
    try {
      io::read_manifest(dir / name);
      FAIL() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse) << name;
    }
  }
}

TEST(TrajectoryFile, RoundTripIsBitExact) {
  test::TempDir dir("traj");
  std::mt19937_64 rng(41);
  Trajectory traj;
  for (int i = 0; i < 30; ++i) traj.poses.push_back(test::random_pose(rng, 100.0));
  io::write_trajectory(traj, dir / "t.txt");
  const auto back = io::read_trajectory(dir / "t.txt");
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) EXPECT_TRUE(back[i] == traj[i]) << i;
}

TEST(TrajectoryFile, RejectsMalformedRows) {
  test::TempDir dir("traj");
  const std::vector<std::string> bad = {
      "1 0 0 0 0 1 0 0 0 0 1\n",        // 11 numbers
      "1 0 0 0 0 1 0 0 0 0 1 0 9\n",    // trailing data
      "2 0 0 0 0 1 0 0 0 0 1 0\n",      // not a rotation
      "1 0 0 x 0 1 0 0 0 0 1 0\n",
  };
  for (const auto& text : bad) {
    test::spit(dir / "t.txt", text);
    try {
      io::read_trajectory(dir / "t.txt");
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse) << text;
    }
  }
}
