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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/labels/waypoint_label.hpp"

namespace lidarsyn {

struct PidGains {
  double kp = 0.0, ki = 0.0, kd = 0.0;
};

struct PidConfig {
  PidGains lateral{1.0, 0.05, 0.2};
  PidGains longitudinal{0.5, 0.05, 0.1};
  double target_speed_scale = 1.0;
  double brake_threshold = 0.4;     // m/s
  double waypoint_interval_s = 0.5;  // time between consecutive waypoints (k / frequency)
  double max_steer_angle = 70.0 * std::numbers::pi / 180.0;

  void validate() const {
    for (const auto& g : {lateral, longitudinal}) {
      if (g.kp < 0 || g.ki < 0 || g.kd < 0) fail(ErrorCode::kInvalidInput, "PID gains must be >= 0");
    }
    if (!(waypoint_interval_s > 0) || !(max_steer_angle > 0) || target_speed_scale < 0) {
      fail(ErrorCode::kInvalidInput, "bad controller timing parameters");
    }
  }
};

struct PidState {
  double lateral_integral = 0.0, lateral_previous = 0.0;
  double longitudinal_integral = 0.0, longitudinal_previous = 0.0;
  bool primed = false;  // previous errors are valid
};

struct ControlCommand {
  double steering = 0.0;  // [-1, 1], +1 is full lock to the right
  double throttle = 0.0;  // [0, 1]
  int brake = 0;          // 0 or 1
};

inline double desired_speed(const WaypointLabel& label, const PidConfig& cfg) {
  const double spacing = 0.5 * (label[0].norm() + (label[1] - label[0]).norm());
  return cfg.target_speed_scale * spacing / cfg.waypoint_interval_s;
}

/// Aim point is the midpoint of w1 and w2. The heading error toward it,
/// normalized by the full-lock steering angle, drives the lateral PID; the
/// gap between desired and current speed drives the longitudinal PID.
inline std::pair<ControlCommand, PidState> waypoints_to_control(const WaypointLabel& label, double current_speed,
                                                                PidState state, const PidConfig& cfg) {
  cfg.validate();
  if (!(current_speed >= 0)) fail(ErrorCode::kInvalidInput, "speed must be >= 0");

  const Vec2 aim = 0.5 * (label[0] + label[1]);
  const double heading_error = std::atan2(aim.y(), aim.x()) / cfg.max_steer_angle;
  const double lat_d = state.primed ? heading_error - state.lateral_previous : 0.0;
  state.lateral_integral += heading_error;
  state.lateral_previous = heading_error;

  const double target = desired_speed(label, cfg);
  const double speed_error = target - current_speed;
  const double lon_d = state.primed ? speed_error - state.longitudinal_previous : 0.0;
  state.longitudinal_integral += speed_error;
  state.longitudinal_previous = speed_error;
  state.primed = true;

  ControlCommand cmd;
  const auto& g = cfg.lateral;
  cmd.steering = std::clamp(g.kp * heading_error + g.ki * state.lateral_integral + g.kd * lat_d, -1.0, 1.0);
  cmd.brake = target < cfg.brake_threshold ? 1 : 0;
  const auto& h = cfg.longitudinal;
  cmd.throttle = cmd.brake ? 0.0 : std::clamp(h.kp * speed_error + h.ki * state.longitudinal_integral + h.kd * lon_d, 0.0, 1.0);
  return {cmd, state};
}

}  // namespace lidarsyn
