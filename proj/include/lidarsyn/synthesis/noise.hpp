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


#pragma once

#include <cstdint>

#include "lidarsyn/core/counter_rng.hpp"
#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"

namespace lidarsyn {

struct NoiseConfig {
  double sigma = 0.02;             // m, per-coordinate Gaussian
  double drop_probability = 0.2;   // independent per point
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma >= 0) || !(drop_probability >= 0) || !(drop_probability < 1)) {
      fail(ErrorCode::kInvalidInput, "noise requires sigma >= 0 and 0 <= drop < 1");
    }
  }
};

/// Drops each point with the configured probability and jitters survivors.
/// Random draws are keyed by (seed, stream, point index); `stream` identifies
/// the scan (e.g. its viewpoint number) so results do not depend on
/// scheduling.
inline PointCloud apply_noise(const PointCloud& cloud, const NoiseConfig& cfg, std::uint64_t stream = 0) {
  cfg.validate();
  const CounterRng rng(cfg.seed, stream);
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    const std::uint64_t base = 8 * static_cast<std::uint64_t>(j);
    if (rng.uniform(base) < cfg.drop_probability) continue;
    // normal(c) consumes uniform counters 2c and 2c + 1, i.e. base + 2 .. base + 7.
    const std::uint64_t nc = base / 2 + 1;
    out.points.push_back(cloud.points[j] +
                         cfg.sigma * Vec3(rng.normal(nc), rng.normal(nc + 1), rng.normal(nc + 2)));
  }
  return out;
}

}  // namespace lidarsyn
