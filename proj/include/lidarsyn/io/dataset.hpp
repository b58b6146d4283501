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

// Training dataset export. Each sample becomes one binary PLY cloud named
//   seq{S}_t{T}_off{O:+.1f}.ply
// holding the frontal half (x >= 0, sensor frame) of the scan, plus one row
// in `index.txt`:
//   sample_id x1 y1 x2 y2 x3 y3 x4 y4 sequence_id timestep offset_m
// Floats use fixed 6-decimal formatting; rows are sorted by
// (sequence, timestep, offset). The column order is a compatibility contract.

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/core/parallel.hpp"
#include "lidarsyn/io/ply.hpp"
#include "lidarsyn/labels/waypoint_label.hpp"

namespace lidarsyn::io {

struct DatasetSample {
  PointCloud cloud;  // sensor frame, full scan; cropped on export
  WaypointLabel label;
  int sequence_id = 0;
  std::size_t timestep = 0;
  double offset_m = 0.0;
};

inline std::string sample_id(int sequence_id, std::size_t timestep, double offset_m) {
  return fmt::format("seq{}_t{}_off{:+.1f}", sequence_id, timestep, offset_m + 0.0);
}

inline constexpr const char* kIndexFileName = "index.txt";
inline constexpr const char* kIndexHeader =
    "# sample_id x1 y1 x2 y2 x3 y3 x4 y4 sequence_id timestep offset_m\n";

/// Points with x >= 0 in the sensor frame, order preserved.
inline PointCloud frontal_crop(const PointCloud& cloud) {
  PointCloud out;
  out.frame = cloud.frame;
  for (const auto& p : cloud.points) {
    if (p.x() >= 0.0) out.points.push_back(p);
  }
  return out;
}

inline std::string format_index_row(const DatasetSample& s) {
  std::string row = sample_id(s.sequence_id, s.timestep, s.offset_m);
  for (const auto& w : s.label.waypoints) row += fmt::format(" {:.6f} {:.6f}", w.x(), w.y());
  row += fmt::format(" {} {} {:.6f}\n", s.sequence_id, s.timestep, s.offset_m + 0.0);
  return row;
}

/// Writes the sample clouds and index into `directory`; returns the index
/// path. Throws kInvalidInput on duplicate sample ids.
inline std::filesystem::path export_dataset(const std::vector<DatasetSample>& samples,
                                            const std::filesystem::path& directory, unsigned workers = 1) {
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = samples[a];
    const auto& y = samples[b];
    if (x.sequence_id != y.sequence_id) return x.sequence_id < y.sequence_id;
    if (x.timestep != y.timestep) return x.timestep < y.timestep;
    return x.offset_m < y.offset_m;
  });
  std::set<std::string> seen;
  for (const auto& s : samples) {
    const auto id = sample_id(s.sequence_id, s.timestep, s.offset_m);
    if (!seen.insert(id).second) fail(ErrorCode::kInvalidInput, "duplicate dataset sample " + id);
    s.cloud.check_finite();
  }

  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + directory.string() + ": " + ec.message());

  parallel_for(samples.size(), workers, [&](std::size_t i) {
    const auto& s = samples[i];
    write_cloud(frontal_crop(s.cloud), directory / (sample_id(s.sequence_id, s.timestep, s.offset_m) + ".ply"));
  });

  std::string index = kIndexHeader;
  for (auto i : order) index += format_index_row(samples[i]);
  const auto index_path = directory / kIndexFileName;
  std::ofstream out(index_path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + index_path.string());
  out << index;
  if (!out) fail(ErrorCode::kIo, "write failed for " + index_path.string());
  return index_path;
}

struct IndexRow {
  std::string sample_id;
  WaypointLabel label;
  int sequence_id = 0;
  std::size_t timestep = 0;
  double offset_m = 0.0;
};

inline std::vector<IndexRow> read_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<IndexRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream f(line);
    IndexRow row;
    f >> row.sample_id;
    for (auto& w : row.label.waypoints) f >> w.x() >> w.y();
    f >> row.sequence_id >> row.timestep >> row.offset_m;
    if (!f) fail(ErrorCode::kParse, fmt::format("{}:{}: malformed index row", path.string(), line_no));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lidarsyn::io
