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

// Trajectory text format: one world-to-sensor pose per line, 12 numbers
// giving the row-major 3x4 matrix [R | t]. Lines starting with '#' are
// comments. Numbers are written in shortest round-trip form.

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/odometry/trajectory.hpp"

namespace lidarsyn::io {

inline void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  std::string out = "# world-to-sensor poses, row-major 3x4 [R | t], one per timestep\n";
  for (const auto& pose : traj.poses) {
    const Mat3& r = pose.rotation();
    const Vec3& t = pose.translation();
    out += fmt::format("{} {} {} {} {} {} {} {} {} {} {} {}\n", r(0, 0), r(0, 1), r(0, 2), t.x(), r(1, 0), r(1, 1),
                       r(1, 2), t.y(), r(2, 0), r(2, 1), r(2, 2), t.z());
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) fail(ErrorCode::kIo, "cannot write " + path.string());
  file << out;
  if (!file) fail(ErrorCode::kIo, "write failed for " + path.string());
}

inline Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open trajectory " + path.string());
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    double v[12];
    for (double& x : v) {
      if (!(fields >> x)) fail(ErrorCode::kParse, fmt::format("{}:{}: expected 12 numbers", path.string(), line_no));
    }
    std::string extra;
    if (fields >> extra) fail(ErrorCode::kParse, fmt::format("{}:{}: trailing data", path.string(), line_no));
    Mat3 r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const Vec3 t(v[3], v[7], v[11]);
    try {
      traj.poses.emplace_back(r, t);
    } catch (const Error&) {
      fail(ErrorCode::kParse, fmt::format("{}:{}: not a rigid transform", path.string(), line_no));
    }
  }
  return traj;
}

}  // namespace lidarsyn::io
