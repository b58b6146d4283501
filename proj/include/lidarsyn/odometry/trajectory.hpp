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

#include "lidarsyn/core/geometry.hpp"

namespace lidarsyn {

/// One world-to-sensor pose per timestep. The world frame is the frame of
/// the first scan, so poses[0] is the identity for estimated trajectories.
struct Trajectory {
  std::vector<PoseSE3> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  const PoseSE3& operator[](std::size_t i) const { return poses[i]; }
};

}  // namespace lidarsyn
