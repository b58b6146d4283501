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

#include <array>

#include "lidarsyn/core/geometry.hpp"

namespace lidarsyn {

/// Four future waypoints in the labeled viewpoint's frame (x forward,
/// y right, meters). The implicit zeroth waypoint is the origin.
struct WaypointLabel {
  std::array<Vec2, 4> waypoints{Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};

  const Vec2& operator[](std::size_t i) const { return waypoints[i]; }
  Vec2& operator[](std::size_t i) { return waypoints[i]; }
};

}  // namespace lidarsyn
