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

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/testbed/scene.hpp"

namespace lidarsyn::testbed {

inline nlohmann::json to_json(const SceneParams& p) {
  return {{"kind", to_string(p.kind)},
          {"length", p.length},
          {"lane_width", p.lane_width},
          {"seed", p.seed},
          {"radius", p.radius},
          {"pose_spacing", p.pose_spacing},
          {"frequency_hz", p.frequency_hz},
          {"sensor_height", p.sensor_height},
          {"curb_height", p.curb_height},
          {"sidewalk_width", p.sidewalk_width},
          {"barrier_setback", p.barrier_setback},
          {"barrier_height", p.barrier_height},
          {"verge_width", p.verge_width},
          {"post_width", p.post_width},
          {"post_height", p.post_height},
          {"post_spacing_min", p.post_spacing_min},
          {"post_spacing_max", p.post_spacing_max},
          {"margin", p.margin},
          {"segment_length", p.segment_length}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline SceneParams scene_params_from_json(const nlohmann::json& j) {
  SceneParams p;
  const nlohmann::json known = to_json(p);
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) fail(ErrorCode::kInvalidInput, "unknown scene key '" + key + "'");
    }
    if (j.contains("kind")) p.kind = parse_scene_kind(j["kind"].get<std::string>());
    auto num = [&](const char* key, auto& out) {
      if (j.contains(key)) out = j[key].get<std::remove_reference_t<decltype(out)>>();
    };
    num("length", p.length);
    num("lane_width", p.lane_width);
    num("seed", p.seed);
    num("radius", p.radius);
    num("pose_spacing", p.pose_spacing);
    num("frequency_hz", p.frequency_hz);
    num("sensor_height", p.sensor_height);
    num("curb_height", p.curb_height);
    num("sidewalk_width", p.sidewalk_width);
    num("barrier_setback", p.barrier_setback);
    num("barrier_height", p.barrier_height);
    num("verge_width", p.verge_width);
    num("post_width", p.post_width);
    num("post_height", p.post_height);
    num("post_spacing_min", p.post_spacing_min);
    num("post_spacing_max", p.post_spacing_max);
    num("margin", p.margin);
    num("segment_length", p.segment_length);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidInput, std::string("scene: ") + e.what());
  }
  p.validate();
  return p;
}

inline SceneParams read_scene_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open scene file " + path.string());
  try {
    return scene_params_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, "scene file " + path.string() + ": " + e.what());
  }
}

inline void write_scene_params(const SceneParams& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << to_json(p).dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace lidarsyn::testbed
