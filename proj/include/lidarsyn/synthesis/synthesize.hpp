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

#include <optional>
#include <vector>

#include "lidarsyn/core/bvh_index.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/core/parallel.hpp"
#include "lidarsyn/synthesis/beam_model.hpp"

namespace lidarsyn {

/// Casts one ray per beam direction from the sensor origin against the mesh
/// and returns the hits within max range in the sensor frame, in direction
/// order. `directions` must come from build_directions(model).
inline PointCloud synthesize_scan(const BvhIndex& mesh, const PoseSE3& sensor_pose, const BeamModel& model,
                                  const std::vector<Vec3>& directions, unsigned workers = 1) {
  const Point3 origin = sensor_pose.origin_in_world();
  const Mat3 to_world = sensor_pose.rotation().transpose();
  std::vector<std::optional<RayHit>> hits(directions.size());
  parallel_for(directions.size(), workers, [&](std::size_t i) {
    const Vec3 d = (to_world * directions[i]).normalized();
    hits[i] = mesh.first_hit_unchecked(origin, d, model.max_range);
  });
  PointCloud out;
  out.frame = Frame::kSensor;
  for (const auto& h : hits) {
    if (h) out.points.push_back(sensor_pose.apply(h->point));
  }
  return out;
}

inline PointCloud synthesize_scan(const BvhIndex& mesh, const PoseSE3& sensor_pose, const BeamModel& model,
                                  unsigned workers = 1) {
  return synthesize_scan(mesh, sensor_pose, model, build_directions(model), workers);
}

/// Fraction of beams that return a hit.
inline double hit_ratio(const PointCloud& scan, const BeamModel& model) {
  return static_cast<double>(scan.size()) / static_cast<double>(model.direction_count());
}

}  // namespace lidarsyn
