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

#include <cmath>
#include <map>
#include <numbers>

#include "lidarsyn/synthesis/beam_model.hpp"

using namespace lidarsyn;
constexpr double kPi = std::numbers::pi;

TEST(BeamModel, SubstitutionCase) {
  double s, c;
  sin_cos_turns(0.0, s, c);
  const Vec3 d = beam_direction(c, s, -kPi / 6.0);
  EXPECT_NEAR(d.x(), std::cos(kPi / 6.0), 1e-15);
  EXPECT_EQ(d.y(), 0.0);
  EXPECT_NEAR(d.z(), -0.5, 1e-15);
}

TEST(BeamModel, QuarterTurnsAreExact) {
  const double expected[4][2] = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}};
  for (int q = 0; q < 4; ++q) {
    double s, c;
    sin_cos_turns(0.25 * q, s, c);
    EXPECT_EQ(s, expected[q][0]) << q;
    EXPECT_EQ(c, expected[q][1]) << q;
  }
  // The rotation about z takes the x axis to the y axis at a quarter turn.
  double s, c;
  sin_cos_turns(0.25, s, c);
  const Vec3 d = beam_direction(c, s, 0.0);
  EXPECT_EQ(d, Vec3(0, 1, 0));
}

TEST(BeamModel, LogSpacingEndpointsAndRatio) {
  const auto e = log_spaced_elevations(64, kPi / 64.0, kPi / 3.0, 1.0);
  ASSERT_EQ(e.size(), 64u);
  EXPECT_EQ(e.front(), kPi / 64.0);
  EXPECT_EQ(e.back(), kPi / 3.0);
  const double ratio = e[1] / e[0];
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_NEAR(e[i] / e[i - 1], ratio, 1e-12);
  const auto down = log_spaced_elevations(64, kPi / 64.0, kPi / 3.0, -1.0);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_EQ(down[i], -e[i]);
}

TEST(BeamModel, DefaultDirectionSet) {
  const BeamModel m = default_beam_model();
  const auto dirs = build_directions(m);
  ASSERT_EQ(dirs.size(), 1024u * 64u);
  EXPECT_EQ(dirs.size(), m.direction_count());
  std::map<long, int> azimuth_hist;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    EXPECT_NEAR(dirs[i].norm(), 1.0, 1e-12);
    EXPECT_LT(dirs[i].z(), 0.0);
    const long bin = std::lround(std::atan2(dirs[i].y(), dirs[i].x()) / (2 * kPi) * 1024.0);
    ++azimuth_hist[(bin + 1024) % 1024];
  }
  ASSERT_EQ(azimuth_hist.size(), 1024u);
  for (const auto& [bin, count] : azimuth_hist) EXPECT_EQ(count, 64);
}

TEST(BeamModel, LiteralSignPointsUp) {
  const auto dirs = build_directions(default_beam_model(16, 8, +1.0));
  for (const auto& d : dirs) EXPECT_GT(d.z(), 0.0);
}

TEST(BeamModel, Validation) {
  EXPECT_THROW(build_directions(BeamModel{0, {0.1}, 80}), Error);
  EXPECT_THROW(build_directions(BeamModel{8, {}, 80}), Error);
  EXPECT_THROW(build_directions(BeamModel{8, {0.1, 0.1}, 80}), Error);
  EXPECT_THROW(build_directions(BeamModel{8, {0.1}, -1}), Error);
  EXPECT_THROW(log_spaced_elevations(4, 0.0, 1.0), Error);
  EXPECT_THROW(log_spaced_elevations(4, 1.0, 0.5), Error);
}
