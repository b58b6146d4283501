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

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"

namespace lidarsyn {

/// sin and cos of 2*pi*turns, exact at multiples of a quarter turn.
inline void sin_cos_turns(double turns, double& s, double& c) {
  double f = turns - std::floor(turns);  // [0, 1)
  const double quarter = std::round(4.0 * f);
  const double rem = f - quarter / 4.0;  // [-1/8, 1/8]
  const double angle = 2.0 * std::numbers::pi * rem;
  const double s0 = std::sin(angle), c0 = std::cos(angle);
  switch (static_cast<int>(quarter) & 3) {
    case 0: s = s0; c = c0; break;
    case 1: s = c0; c = -s0; break;
    case 2: s = -s0; c = -c0; break;
    default: s = -c0; c = s0; break;
  }
}

/// Direction of a beam at azimuth phi (rotation about +z) and elevation theta:
/// H(phi) * (cos theta, 0, sin theta).
inline Vec3 beam_direction(double cos_phi, double sin_phi, double theta) {
  const Vec3 v(std::cos(theta), 0.0, std::sin(theta));
  Mat3 h;
  h << cos_phi, -sin_phi, 0.0, sin_phi, cos_phi, 0.0, 0.0, 0.0, 1.0;
  return h * v;
}

/// Sensor beam pattern: `azimuth_count` azimuths uniform over [-pi, pi) and
/// one ray per elevation channel at each azimuth.
struct BeamModel {
  int azimuth_count = 1024;
  std::vector<double> elevations;  // radians, strictly monotonic; negative points below horizontal
  double max_range = 80.0;         // m

  /// Azimuth of sample a, expressed in turns: -1/2 + a / azimuth_count.
  double azimuth_turns(int a) const { return -0.5 + static_cast<double>(a) / azimuth_count; }
  double azimuth(int a) const { return 2.0 * std::numbers::pi * azimuth_turns(a); }

  std::size_t direction_count() const { return static_cast<std::size_t>(azimuth_count) * elevations.size(); }

  void validate() const {
    if (azimuth_count < 1) fail(ErrorCode::kInvalidInput, "azimuth count must be >= 1");
    if (elevations.empty()) fail(ErrorCode::kInvalidInput, "beam model needs at least one elevation");
    if (!(max_range > 0) || !std::isfinite(max_range)) fail(ErrorCode::kInvalidInput, "max range must be positive");
    for (double e : elevations) {
      if (!std::isfinite(e)) fail(ErrorCode::kInvalidInput, "non-finite elevation");
    }
    if (elevations.size() > 1) {
      const bool up = elevations[1] > elevations[0];
      for (std::size_t i = 1; i < elevations.size(); ++i) {
        if (up ? !(elevations[i] > elevations[i - 1]) : !(elevations[i] < elevations[i - 1])) {
          fail(ErrorCode::kInvalidInput, "elevations must be strictly monotonic");
        }
      }
    }
  }
};

/// `count` angles whose magnitudes form a geometric progression from
/// `min_magnitude` to `max_magnitude` (endpoints exact), multiplied by `sign`.
/// sign = -1 gives depression angles that reach the road from a roof mount.
inline std::vector<double> log_spaced_elevations(int count, double min_magnitude, double max_magnitude,
                                                 double sign = -1.0) {
  if (count < 1 || !(min_magnitude > 0) || !(max_magnitude >= min_magnitude)) {
    fail(ErrorCode::kInvalidInput, "bad elevation range");
  }
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = sign * min_magnitude;
    return out;
  }
  const double log_lo = std::log(min_magnitude), log_hi = std::log(max_magnitude);
  for (int i = 0; i < count; ++i) {
    const double mag = i == 0           ? min_magnitude
                       : i == count - 1 ? max_magnitude
                                        : std::exp(log_lo + (log_hi - log_lo) * i / (count - 1));
    out[i] = sign * mag;
  }
  return out;
}

inline constexpr double kDefaultMinElevation = std::numbers::pi / 64.0;
inline constexpr double kDefaultMaxElevation = std::numbers::pi / 3.0;

inline BeamModel default_beam_model(int azimuth_count = 1024, int channels = 64, double elevation_sign = -1.0,
                                    double max_range = 80.0) {
  return BeamModel{azimuth_count,
                   log_spaced_elevations(channels, kDefaultMinElevation, kDefaultMaxElevation, elevation_sign),
                   max_range};
}

/// Sensor-frame unit directions, azimuth-major: index = a * |elevations| + e.
inline std::vector<Vec3> build_directions(const BeamModel& model) {
  model.validate();
  std::vector<Vec3> dirs;
  dirs.reserve(model.direction_count());
  for (int a = 0; a < model.azimuth_count; ++a) {
    double s, c;
    sin_cos_turns(model.azimuth_turns(a), s, c);
    for (double theta : model.elevations) dirs.push_back(beam_direction(c, s, theta));
  }
  return dirs;
}

}  // namespace lidarsyn
