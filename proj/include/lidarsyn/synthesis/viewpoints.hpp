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

#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/odometry/trajectory.hpp"

namespace lidarsyn {

struct Viewpoint {
  double offset_m = 0.0;  // along the reference sensor's local +y (right)
  PoseSE3 pose;           // world-to-sensor of the virtual sensor
};

/// viewpoints[i] holds one entry per requested offset for reference timestep i.
struct ViewpointSet {
  std::vector<std::vector<Viewpoint>> viewpoints;
};

/// `count` offsets spaced linearly over [-half_range, +half_range], exactly
/// symmetric about zero.
inline std::vector<double> linear_offsets(int count = 11, double half_range = 2.0) {
  if (count < 1) fail(ErrorCode::kInvalidInput, "offset count must be >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = 0.0;
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out[i] = static_cast<double>(2 * i - (count - 1)) / (count - 1) * half_range + 0.0;
  }
  return out;
}

/// Moves the sensor by `offset_m` along its own right axis keeping its
/// orientation and height. For a world-to-sensor pose (R, t) this is
/// (R, t - offset * e_y); offset 0 returns the reference bit for bit.
inline PoseSE3 lateral_offset_pose(const PoseSE3& reference, double offset_m) {
  Vec3 t = reference.translation();
  t.y() -= offset_m;
  return PoseSE3::unchecked(reference.rotation(), t);
}

inline ViewpointSet sample_viewpoints(const Trajectory& traj, const std::vector<double>& offsets) {
  if (traj.empty()) fail(ErrorCode::kInvalidInput, "cannot sample viewpoints of an empty trajectory");
  ViewpointSet set;
  set.viewpoints.resize(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    for (double o : offsets) set.viewpoints[i].push_back({o, lateral_offset_pose(traj[i], o)});
  }
  return set;
}

}  // namespace lidarsyn
