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

#include "lidarsyn/core/counter_rng.hpp"
#include "lidarsyn/synthesis/noise.hpp"

using namespace lidarsyn;

namespace {

PointCloud grid(std::size_t n) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({static_cast<double>(i % 100), static_cast<double>(i / 100), 1.0});
  return c;
}

}  // namespace

TEST(Noise, ZeroConfigIsIdentity) {
  const PointCloud c = grid(1000);
  NoiseConfig cfg;
  cfg.sigma = 0.0;
  cfg.drop_probability = 0.0;
  EXPECT_EQ(apply_noise(c, cfg, 3).points, c.points);
}

TEST(Noise, DropFractionWithinBinomialBound) {
  const PointCloud c = grid(100000);
  NoiseConfig cfg;
  cfg.sigma = 0.0;
  cfg.drop_probability = 0.2;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto out = apply_noise(c, cfg, seed * 7);
    EXPECT_GE(out.size(), 78000u) << seed;
    EXPECT_LE(out.size(), 82000u) << seed;
  }
}

TEST(Noise, GaussianMomentsWithinEstimatorBounds) {
  const std::size_t n = 100000;
  const PointCloud c = grid(n);
  NoiseConfig cfg;
  cfg.sigma = 0.02;
  cfg.drop_probability = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto out = apply_noise(c, cfg);
    ASSERT_EQ(out.size(), n);
    for (int k = 0; k < 3; ++k) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = out.points[i][k] - c.points[i][k];
        sum += d;
        sq += d * d;
      }
      const double mean = sum / n;
      const double sd = std::sqrt(sq / n - mean * mean);
      EXPECT_LT(std::abs(mean), 4.0 * 0.02 / std::sqrt(static_cast<double>(n)));
      EXPECT_NEAR(sd, 0.02, 0.02 * 0.02);
    }
  }
}

TEST(Noise, DeterministicPerSeedAndStream) {
  const PointCloud c = grid(5000);
  NoiseConfig cfg;
  cfg.seed = 9;
  EXPECT_EQ(apply_noise(c, cfg, 4).points, apply_noise(c, cfg, 4).points);
  EXPECT_NE(apply_noise(c, cfg, 4).points, apply_noise(c, cfg, 5).points);
  NoiseConfig other = cfg;
  other.seed = 10;
  EXPECT_NE(apply_noise(c, cfg, 4).points, apply_noise(c, other, 4).points);
}

TEST(Noise, Validation) {
  NoiseConfig cfg;
  cfg.drop_probability = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.drop_probability = -0.1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.drop_probability = 0.1;
  cfg.sigma = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(CounterRng, UniformRangeAndIndependence) {
  const CounterRng a(1, 2), b(1, 3);
  int differ = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const double u = a.uniform(i);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    differ += a.bits(i) != b.bits(i);
  }
  EXPECT_EQ(differ, 10000);
}
