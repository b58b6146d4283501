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
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/core/parallel.hpp"
#include "lidarsyn/io/sequence.hpp"
#include "lidarsyn/odometry/trajectory.hpp"

namespace lidarsyn {

/// All scans expressed in the world frame (the frame of scan 0).
struct FusedCloud {
  PointCloud cloud;
  std::vector<std::uint32_t> source_timestep;  // parallel to cloud.points
};

/// Maps scan i into the world frame with the inverse of its world-to-sensor
/// pose and concatenates the results in timestep order.
inline FusedCloud accumulate(const io::ScanSequence& seq, const Trajectory& traj, unsigned workers = 1) {
  if (seq.size() != traj.size()) {
    fail(ErrorCode::kInvalidInput, "sequence has " + std::to_string(seq.size()) + " scans but trajectory has " +
                                       std::to_string(traj.size()) + " poses");
  }
  std::vector<std::size_t> start(seq.size() + 1, 0);
  for (std::size_t i = 0; i < seq.size(); ++i) start[i + 1] = start[i] + seq.scans[i].size();

  FusedCloud fused;
  fused.cloud.frame = Frame::kWorld;
  fused.cloud.points.resize(start.back());
  fused.source_timestep.resize(start.back());
  parallel_for(seq.size(), workers, [&](std::size_t i) {
    const PoseSE3& pose = traj[i];
    pose.validate();
    const auto& pts = seq.scans[i].points;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      fused.cloud.points[start[i] + j] = pose.apply_inverse(pts[j]);
      fused.source_timestep[start[i] + j] = static_cast<std::uint32_t>(i);
    }
  });
  return fused;
}

}  // namespace lidarsyn
