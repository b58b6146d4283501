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

#include <fmt/format.h>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/labels/cubic_spline.hpp"
#include "lidarsyn/labels/waypoint_label.hpp"
#include "lidarsyn/odometry/trajectory.hpp"

namespace lidarsyn {

struct LabelConfig {
  int frame_skip = 5;  // k: frames between consecutive waypoints

  void validate() const {
    if (frame_skip < 1) fail(ErrorCode::kInvalidInput, "frame skip must be >= 1");
  }
};

/// Knot values closer than this are treated as coincident.
inline constexpr double kDegenerateKnotTolerance = 1e-9;

/// Timesteps i with i + 4k < trajectory length.
inline std::size_t labelable_count(std::size_t trajectory_length, const LabelConfig& cfg) {
  const std::size_t span = 4 * static_cast<std::size_t>(cfg.frame_skip);
  return trajectory_length > span ? trajectory_length - span : 0;
}

namespace detail {

inline void check_label_range(const Trajectory& traj, std::size_t i, const LabelConfig& cfg) {
  cfg.validate();
  if (i + 4 * static_cast<std::size_t>(cfg.frame_skip) >= traj.size()) {
    fail(ErrorCode::kOutOfRange, fmt::format("timestep {} + 4*{} exceeds trajectory of length {}", i, cfg.frame_skip,
                                             traj.size()));
  }
}

inline Vec2 planar(const Vec3& p) { return {p.x(), p.y()}; }

}  // namespace detail

/// Waypoint m is the sensor position at timestep i + m*k expressed in the
/// frame of pose i, projected onto the x-y plane.
inline WaypointLabel reference_label(const Trajectory& traj, std::size_t i, const LabelConfig& cfg) {
  detail::check_label_range(traj, i, cfg);
  WaypointLabel label;
  for (std::size_t m = 1; m <= 4; ++m) {
    const Point3 future = traj[i + m * cfg.frame_skip].origin_in_world();
    label[m - 1] = detail::planar(traj[i].apply(future));
  }
  return label;
}

/// Label for a virtual sensor at `offset_pose` next to reference timestep i.
/// The last two waypoints are the reference poses i + 3k and i + 4k seen
/// from the virtual sensor; the first two come from a natural cubic spline
/// through (0,0), w3, w4 parameterized by waypoint index {0, 3, 4}.
inline WaypointLabel offset_label(const Trajectory& traj, std::size_t i, const PoseSE3& offset_pose,
                                  const LabelConfig& cfg) {
  detail::check_label_range(traj, i, cfg);
  WaypointLabel label;
  const Vec2 w3 = detail::planar(offset_pose.apply(traj[i + 3 * cfg.frame_skip].origin_in_world()));
  const Vec2 w4 = detail::planar(offset_pose.apply(traj[i + 4 * cfg.frame_skip].origin_in_world()));
  label[2] = w3;
  label[3] = w4;
  if ((w4 - w3).norm() <= kDegenerateKnotTolerance) {
    // Coincident end knots (e.g. a stationary vehicle): linear from the origin to w3.
    label[0] = w3 / 3.0;
    label[1] = w3 * (2.0 / 3.0);
    return label;
  }
  for (int c = 0; c < 2; ++c) {
    const NaturalCubicSpline spline({0.0, 3.0, 4.0}, {0.0, w3[c], w4[c]});
    label[0][c] = spline(1.0);
    label[1][c] = spline(2.0);
  }
  return label;
}

}  // namespace lidarsyn
