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

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/labels/controller.hpp"
#include "lidarsyn/labels/waypoints.hpp"
#include "lidarsyn/odometry/icp.hpp"
#include "lidarsyn/scene/ball_pivoting.hpp"
#include "lidarsyn/synthesis/beam_model.hpp"
#include "lidarsyn/synthesis/noise.hpp"
#include "lidarsyn/synthesis/viewpoints.hpp"

namespace lidarsyn::pipeline {

/// Named sensor layout: `channels` elevations log-spaced over magnitudes
/// [min_elevation, max_elevation] with the given sign.
struct SensorPreset {
  int azimuth_count = 1024;
  int channels = 64;
  double min_elevation = kDefaultMinElevation;
  double max_elevation = kDefaultMaxElevation;
  double elevation_sign = -1.0;
  double max_range = 80.0;

  BeamModel model() const {
    BeamModel m;
    m.azimuth_count = azimuth_count;
    m.elevations = log_spaced_elevations(channels, min_elevation, max_elevation, elevation_sign);
    m.max_range = max_range;
    m.validate();
    return m;
  }
};

/// Beam settings as written in a config; unset fields fall back to the preset.
struct BeamSettings {
  std::string preset;  // empty: manifest preset, else "default"
  std::optional<int> azimuth_count, channels;
  std::optional<double> min_elevation, max_elevation, elevation_sign, max_range;
  std::optional<std::vector<double>> elevations;  // explicit signed list, overrides log spacing
};

struct PipelineConfig {
  std::filesystem::path manifest;
  std::filesystem::path output_dir = "out";
  std::filesystem::path trajectory;  // when set, poses are read instead of estimated
  int sequence_id = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency

  IcpConfig icp;
  BpaConfig bpa;
  BeamSettings beam;
  std::map<std::string, SensorPreset> sensor_presets{{"default", SensorPreset{}}};
  std::vector<double> offsets = linear_offsets();
  LabelConfig labels;
  NoiseConfig noise;
  PidConfig pid;

  unsigned worker_count() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  /// Beam model from the preset named in the config, else `manifest_preset`,
  /// else "default", with explicit beam fields applied on top.
  BeamModel beam_model(const std::string& manifest_preset = {}) const {
    std::string name = beam.preset;
    if (name.empty()) name = manifest_preset.empty() ? "default" : manifest_preset;
    const auto it = sensor_presets.find(name);
    if (it == sensor_presets.end()) fail(ErrorCode::kInvalidInput, "unknown sensor preset '" + name + "'");
    SensorPreset p = it->second;
    if (beam.azimuth_count) p.azimuth_count = *beam.azimuth_count;
    if (beam.channels) p.channels = *beam.channels;
    if (beam.min_elevation) p.min_elevation = *beam.min_elevation;
    if (beam.max_elevation) p.max_elevation = *beam.max_elevation;
    if (beam.elevation_sign) p.elevation_sign = *beam.elevation_sign;
    if (beam.max_range) p.max_range = *beam.max_range;
    if (!beam.elevations) return p.model();
    BeamModel m;
    m.azimuth_count = p.azimuth_count;
    m.elevations = *beam.elevations;
    m.max_range = p.max_range;
    m.validate();
    return m;
  }

  void validate() const {
    icp.validate();
    bpa.validate();
    labels.validate();
    noise.validate();
    pid.validate();
    if (offsets.empty()) fail(ErrorCode::kInvalidInput, "at least one lateral offset is required");
    std::set<std::string> ids;
    for (double o : offsets) {
      if (!std::isfinite(o)) fail(ErrorCode::kInvalidInput, "non-finite lateral offset");
      if (!ids.insert(fmt::format("{:+.1f}", o + 0.0)).second) {
        fail(ErrorCode::kInvalidInput, fmt::format("offsets collide at one decimal: {:+.1f}", o + 0.0));
      }
    }
    if (sequence_id < 0) fail(ErrorCode::kInvalidInput, "sequence_id must be >= 0");
    for (const auto& [name, preset] : sensor_presets) {
      try {
        (void)preset.model();
      } catch (const Error& e) {
        fail(ErrorCode::kInvalidInput, "sensor preset '" + name + "': " + e.message());
      }
    }
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ErrorCode::kInvalidInput, "config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(ErrorCode::kInvalidInput, "unknown config key '" + section + "." + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void read_gains(const json& j, const std::string& section, PidGains& g) {
  check_keys(j, section, {"kp", "ki", "kd"});
  read(j, "kp", g.kp);
  read(j, "ki", g.ki);
  read(j, "kd", g.kd);
}

inline SensorPreset read_preset(const json& j, const std::string& section) {
  check_keys(j, section, {"azimuth_count", "channels", "min_elevation", "max_elevation", "elevation_sign", "max_range"});
  SensorPreset p;
  read(j, "azimuth_count", p.azimuth_count);
  read(j, "channels", p.channels);
  read(j, "min_elevation", p.min_elevation);
  read(j, "max_elevation", p.max_elevation);
  read(j, "elevation_sign", p.elevation_sign);
  read(j, "max_range", p.max_range);
  return p;
}

}  // namespace detail

/// Applies the keys present in `j` on top of `cfg`. Relative paths are
/// resolved against `base`.
inline void apply_json(PipelineConfig& cfg, const nlohmann::json& j, const std::filesystem::path& base = {}) {
  using detail::check_keys;
  using detail::read;
  try {
    check_keys(j, "<root>",
               {"input", "output_dir", "sequence_id", "seed", "workers", "icp", "bpa", "beam", "sensor_presets",
                "viewpoints", "labels", "noise", "pid"});
    auto path = [&](const nlohmann::json& v) {
      std::filesystem::path p = v.get<std::string>();
      return p.empty() || p.is_absolute() || base.empty() ? p : base / p;
    };
    if (j.contains("input")) {
      const auto& in = j["input"];
      check_keys(in, "input", {"manifest", "trajectory"});
      if (in.contains("manifest")) cfg.manifest = path(in["manifest"]);
      if (in.contains("trajectory")) cfg.trajectory = path(in["trajectory"]);
    }
    if (j.contains("output_dir")) cfg.output_dir = path(j["output_dir"]);
    read(j, "sequence_id", cfg.sequence_id);
    read(j, "seed", cfg.seed);
    read(j, "workers", cfg.workers);
    if (j.contains("icp")) {
      const auto& s = j["icp"];
      check_keys(s, "icp", {"max_iterations", "convergence_threshold", "max_correspondence_distance", "voxel_size"});
      read(s, "max_iterations", cfg.icp.max_iterations);
      read(s, "convergence_threshold", cfg.icp.convergence_threshold);
      read(s, "max_correspondence_distance", cfg.icp.max_correspondence_distance);
      read(s, "voxel_size", cfg.icp.voxel_size);
    }
    if (j.contains("bpa")) {
      const auto& s = j["bpa"];
      check_keys(s, "bpa", {"radii", "dedup_voxel", "normal_neighbors"});
      read(s, "radii", cfg.bpa.radii);
      read(s, "dedup_voxel", cfg.bpa.dedup_voxel);
      read(s, "normal_neighbors", cfg.bpa.normal_neighbors);
    }
    if (j.contains("sensor_presets")) {
      const auto& s = j["sensor_presets"];
      if (!s.is_object()) fail(ErrorCode::kInvalidInput, "config section 'sensor_presets' must be an object");
      for (const auto& [name, preset] : s.items()) {
        cfg.sensor_presets[name] = detail::read_preset(preset, "sensor_presets." + name);
      }
    }
    if (j.contains("beam")) {
      const auto& s = j["beam"];
      check_keys(s, "beam",
                 {"preset", "azimuth_count", "channels", "min_elevation", "max_elevation", "elevation_sign",
                  "max_range", "elevations"});
      read(s, "preset", cfg.beam.preset);
      read(s, "azimuth_count", cfg.beam.azimuth_count);
      read(s, "channels", cfg.beam.channels);
      read(s, "min_elevation", cfg.beam.min_elevation);
      read(s, "max_elevation", cfg.beam.max_elevation);
      read(s, "elevation_sign", cfg.beam.elevation_sign);
      read(s, "max_range", cfg.beam.max_range);
      read(s, "elevations", cfg.beam.elevations);
    }
    if (j.contains("viewpoints")) {
      const auto& s = j["viewpoints"];
      check_keys(s, "viewpoints", {"count", "half_range", "offsets"});
      if (s.contains("offsets") && (s.contains("count") || s.contains("half_range"))) {
        fail(ErrorCode::kInvalidInput, "viewpoints: give either offsets or count/half_range");
      }
      if (s.contains("offsets")) {
        cfg.offsets = s["offsets"].get<std::vector<double>>();
      } else if (s.contains("count") || s.contains("half_range")) {
        cfg.offsets = linear_offsets(s.value("count", 11), s.value("half_range", 2.0));
      }
    }
    if (j.contains("labels")) {
      check_keys(j["labels"], "labels", {"frame_skip"});
      read(j["labels"], "frame_skip", cfg.labels.frame_skip);
    }
    if (j.contains("noise")) {
      const auto& s = j["noise"];
      check_keys(s, "noise", {"sigma", "drop_probability"});
      read(s, "sigma", cfg.noise.sigma);
      read(s, "drop_probability", cfg.noise.drop_probability);
    }
    if (j.contains("pid")) {
      const auto& s = j["pid"];
      check_keys(s, "pid",
                 {"lateral", "longitudinal", "target_speed_scale", "brake_threshold", "waypoint_interval_s",
                  "max_steer_angle"});
      if (s.contains("lateral")) detail::read_gains(s["lateral"], "pid.lateral", cfg.pid.lateral);
      if (s.contains("longitudinal")) detail::read_gains(s["longitudinal"], "pid.longitudinal", cfg.pid.longitudinal);
      read(s, "target_speed_scale", cfg.pid.target_speed_scale);
      read(s, "brake_threshold", cfg.pid.brake_threshold);
      read(s, "waypoint_interval_s", cfg.pid.waypoint_interval_s);
      read(s, "max_steer_angle", cfg.pid.max_steer_angle);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidInput, std::string("config: ") + e.what());
  }
  cfg.noise.seed = cfg.seed;
}

/// Reads a JSON config file over the defaults. Paths inside are relative to
/// the file's directory.
inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, "config " + path.string() + ": " + e.what());
  }
  PipelineConfig cfg;
  apply_json(cfg, j, path.parent_path());
  return cfg;
}

}  // namespace lidarsyn::pipeline
