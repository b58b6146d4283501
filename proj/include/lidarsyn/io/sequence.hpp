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

// Scan sequences and the manifest file that lists them.
//
// Manifest format (UTF-8, line oriented):
//   frequency_hz=<float>          required, first line
//   sensor_preset=<name>          optional
//   <scan path>                   one per line, in timestep order; relative
//                                 paths resolve against the manifest directory
// Blank lines and lines starting with '#' are ignored.

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/io/ply.hpp"

namespace lidarsyn::io {

/// Scans in timestep order (scan i is timestep i) captured at a constant rate.
struct ScanSequence {
  std::vector<PointCloud> scans;
  double frequency_hz = 10.0;

  std::size_t size() const { return scans.size(); }
};

struct SequenceManifest {
  std::vector<std::filesystem::path> scan_paths;
  double frequency_hz = 10.0;
  std::string sensor_preset;
};

inline SequenceManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open manifest " + path.string());
  SequenceManifest manifest;
  const auto base = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  bool have_frequency = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_frequency) {
      const std::string key = "frequency_hz=";
      if (line.rfind(key, 0) != 0) {
        fail(ErrorCode::kParse, fmt::format("{}:{}: expected frequency_hz=<f>", path.string(), line_no));
      }
      try {
        manifest.frequency_hz = std::stod(line.substr(key.size()));
      } catch (const std::exception&) {
        fail(ErrorCode::kParse, fmt::format("{}:{}: bad frequency", path.string(), line_no));
      }
      if (!(manifest.frequency_hz > 0)) {
        fail(ErrorCode::kParse, fmt::format("{}:{}: frequency must be positive", path.string(), line_no));
      }
      have_frequency = true;
      continue;
    }
    if (line.rfind("sensor_preset=", 0) == 0) {
      manifest.sensor_preset = line.substr(14);
      continue;
    }
    std::filesystem::path scan(line);
    if (scan.is_relative()) scan = base / scan;
    if (!std::filesystem::exists(scan)) {
      fail(ErrorCode::kIo, fmt::format("{}:{}: scan file not found: {}", path.string(), line_no, scan.string()));
    }
    manifest.scan_paths.push_back(scan);
  }
  if (!have_frequency) fail(ErrorCode::kParse, path.string() + ": missing frequency_hz header");
  return manifest;
}

inline void write_manifest(const SequenceManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << fmt::format("frequency_hz={}\n", manifest.frequency_hz);
  if (!manifest.sensor_preset.empty()) out << "sensor_preset=" << manifest.sensor_preset << "\n";
  // Paths are written verbatim; relative ones must be relative to the manifest.
  for (const auto& p : manifest.scan_paths) out << p.generic_string() << "\n";
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

inline ScanSequence load_sequence(const SequenceManifest& manifest) {
  ScanSequence seq;
  seq.frequency_hz = manifest.frequency_hz;
  seq.scans.reserve(manifest.scan_paths.size());
  for (const auto& p : manifest.scan_paths) {
    seq.scans.push_back(read_cloud(p));
    seq.scans.back().frame = Frame::kSensor;
  }
  return seq;
}

}  // namespace lidarsyn::io
