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
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/parallel.hpp"
#include "lidarsyn/io/dataset.hpp"
#include "lidarsyn/io/ply.hpp"
#include "lidarsyn/io/sequence.hpp"
#include "lidarsyn/io/trajectory_file.hpp"
#include "lidarsyn/labels/waypoints.hpp"
#include "lidarsyn/odometry/icp.hpp"
#include "lidarsyn/pipeline/config.hpp"
#include "lidarsyn/scene/accumulate.hpp"
#include "lidarsyn/scene/ball_pivoting.hpp"
#include "lidarsyn/synthesis/noise.hpp"
#include "lidarsyn/synthesis/synthesize.hpp"
#include "lidarsyn/synthesis/viewpoints.hpp"

namespace lidarsyn::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

/// File names of the stage artifacts inside an output directory.
struct Layout {
  fs::path dir;

  fs::path trajectory() const { return dir / "trajectory.txt"; }
  fs::path fused() const { return dir / "fused.ply"; }
  fs::path mesh() const { return dir / "mesh.ply"; }
  fs::path labels() const { return dir / "labels.txt"; }
  fs::path synth_dir() const { return dir / "synth"; }
  fs::path dataset_dir() const { return dir / "dataset"; }
  fs::path report() const { return dir / "report.json"; }
  fs::path partial_marker() const { return dir / ".partial"; }
  fs::path synth_scan(int sequence_id, std::size_t t, double offset) const {
    return synth_dir() / (io::sample_id(sequence_id, t, offset) + ".ply");
  }
};

struct LabelRecord {
  std::size_t timestep = 0;
  double offset_m = 0.0;
  WaypointLabel label;
};

inline constexpr const char* kLabelsHeader = "# timestep offset_m x1 y1 x2 y2 x3 y3 x4 y4\n";

/// Label records with shortest round-trip number formatting.
inline void write_labels(const std::vector<LabelRecord>& records, const fs::path& path) {
  std::string text = kLabelsHeader;
  for (const auto& r : records) {
    text += fmt::format("{} {}", r.timestep, r.offset_m + 0.0);
    for (const auto& w : r.label.waypoints) text += fmt::format(" {} {}", w.x(), w.y());
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

inline std::vector<LabelRecord> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<LabelRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    LabelRecord r;
    ss >> r.timestep >> r.offset_m;
    for (auto& w : r.label.waypoints) ss >> w.x() >> w.y();
    std::string extra;
    if (!ss || (ss >> extra)) fail(ErrorCode::kParse, fmt::format("{}:{}: expected 10 fields", path.string(), line_no));
    records.push_back(r);
  }
  return records;
}

/// Timesteps that receive labels and samples.
inline std::size_t usable_timesteps(const Trajectory& traj, const PipelineConfig& cfg) {
  return labelable_count(traj.size(), cfg.labels);
}

inline std::uint64_t noise_stream(std::size_t t, std::size_t offset_index, std::size_t offset_count) {
  return static_cast<std::uint64_t>(t) * offset_count + offset_index;
}

inline Trajectory load_checked_trajectory(const Layout& out, std::size_t expected) {
  if (!fs::exists(out.trajectory())) fail(ErrorCode::kInvalidInput, "missing artifact " + out.trajectory().string());
  Trajectory traj = io::read_trajectory(out.trajectory());
  if (traj.size() != expected) {
    fail(ErrorCode::kInvalidInput,
         fmt::format("{} has {} poses for {} scans", out.trajectory().string(), traj.size(), expected));
  }
  return traj;
}

inline void require(const fs::path& p) {
  if (!fs::exists(p)) fail(ErrorCode::kInvalidInput, "missing artifact " + p.string());
}

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + p.string() + ": " + ec.message());
}

// Removes the .ply files a stage owns so reruns with fewer outputs leave
// nothing stale behind.
inline void clear_ply(const fs::path& dir) {
  if (!fs::exists(dir)) return;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".ply") fs::remove(e.path());
  }
}

/// Manifest scans -> trajectory.txt. A configured trajectory file is copied
/// through instead of running ICP.
inline json odometry_stage(const PipelineConfig& cfg) {
  const Layout out{cfg.output_dir};
  const auto seq = io::load_sequence(io::read_manifest(cfg.manifest));
  ensure_dir(out.dir);
  json stats{{"scans", seq.size()}};
  Trajectory traj;
  if (!cfg.trajectory.empty()) {
    traj = io::read_trajectory(cfg.trajectory);
    if (traj.size() != seq.size()) {
      fail(ErrorCode::kInvalidInput,
           fmt::format("trajectory {} has {} poses for {} scans", cfg.trajectory.string(), traj.size(), seq.size()));
    }
    stats["source"] = "file";
  } else {
    std::vector<IcpResult> pairs;
    traj = estimate_trajectory(seq, cfg.icp, cfg.worker_count(), &pairs);
    std::vector<double> residuals;
    std::vector<int> iterations;
    for (const auto& p : pairs) {
      residuals.push_back(p.residual);
      iterations.push_back(p.iterations);
    }
    stats["source"] = "icp";
    stats["pair_residual_m"] = residuals;
    stats["pair_iterations"] = iterations;
  }
  io::write_trajectory(traj, out.trajectory());
  return stats;
}

/// Scans + trajectory -> fused.ply (world frame, float64).
inline json accumulate_stage(const PipelineConfig& cfg) {
  const Layout out{cfg.output_dir};
  const auto seq = io::load_sequence(io::read_manifest(cfg.manifest));
  const Trajectory traj = load_checked_trajectory(out, seq.size());
  const FusedCloud fused = accumulate(seq, traj, cfg.worker_count());
  io::write_cloud(fused.cloud, out.fused(), io::PlyFormat::kBinaryLittleEndian, io::PlyScalar::kFloat64);
  return {{"points", fused.cloud.size()}};
}

/// fused.ply + trajectory -> mesh.ply (float64).
inline json mesh_stage(const PipelineConfig& cfg) {
  const Layout out{cfg.output_dir};
  require(out.fused());
  require(out.trajectory());
  FusedCloud fused;
  fused.cloud = io::read_cloud(out.fused());
  fused.cloud.frame = Frame::kWorld;
  const Trajectory traj = io::read_trajectory(out.trajectory());
  std::vector<Point3> viewpoints;
  for (const auto& pose : traj.poses) viewpoints.push_back(pose.origin_in_world());
  MeshStats ms;
  const TriangleMesh mesh = reconstruct_mesh(fused, cfg.bpa, viewpoints, &ms, cfg.worker_count());
  io::write_mesh(mesh, out.mesh());
  return {{"input_points", ms.input_points},   {"vertices", ms.vertices},
          {"vertices_used", ms.vertices_used}, {"unreferenced", ms.unreferenced},
          {"triangles", ms.triangles},         {"triangles_per_radius", ms.triangles_per_radius}};
}

/// Viewpoint poses for every usable timestep and configured offset.
inline ViewpointSet usable_viewpoints(const Trajectory& traj, const PipelineConfig& cfg) {
  ViewpointSet set = sample_viewpoints(traj, cfg.offsets);
  set.viewpoints.resize(usable_timesteps(traj, cfg));
  return set;
}

/// trajectory -> labels.txt. Offset 0 uses the reference label, every other
/// offset the spline label of its virtual pose.
inline json label_stage(const PipelineConfig& cfg) {
  const Layout out{cfg.output_dir};
  require(out.trajectory());
  const Trajectory traj = io::read_trajectory(out.trajectory());
  const ViewpointSet views = usable_viewpoints(traj, cfg);
  std::vector<LabelRecord> records;
  for (std::size_t t = 0; t < views.viewpoints.size(); ++t) {
    for (const auto& v : views.viewpoints[t]) {
      const WaypointLabel label = v.offset_m == 0.0 ? reference_label(traj, t, cfg.labels)
                                                    : offset_label(traj, t, v.pose, cfg.labels);
      records.push_back({t, v.offset_m, label});
    }
  }
  write_labels(records, out.labels());
  return {{"timesteps", views.viewpoints.size()}, {"labels", records.size()}};
}

/// mesh + trajectory -> synth/<sample id>.ply for every nonzero offset of
/// every usable timestep, noise applied, float32.
inline json synthesize_stage(const PipelineConfig& cfg) {
  const Layout out{cfg.output_dir};
  require(out.mesh());
  require(out.trajectory());
  const auto manifest = io::read_manifest(cfg.manifest);
  const BeamModel model = cfg.beam_model(manifest.sensor_preset);
  const Trajectory traj = io::read_trajectory(out.trajectory());
  const ViewpointSet views = usable_viewpoints(traj, cfg);
  const BvhIndex bvh(io::read_mesh(out.mesh()));
  const auto dirs = build_directions(model);

  struct Job {
    std::size_t t, j;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < views.viewpoints.size(); ++t) {
    for (std::size_t j = 0; j < views.viewpoints[t].size(); ++j) {
      if (views.viewpoints[t][j].offset_m != 0.0) jobs.push_back({t, j});
    }
  }
  ensure_dir(out.synth_dir());
  clear_ply(out.synth_dir());
  std::vector<double> ratios(jobs.size());
  parallel_for(jobs.size(), cfg.worker_count(), [&](std::size_t k) {
    const auto& v = views.viewpoints[jobs[k].t][jobs[k].j];
    const PointCloud clean = synthesize_scan(bvh, v.pose, model, dirs);
    ratios[k] = hit_ratio(clean, model);
    const PointCloud noisy = apply_noise(clean, cfg.noise, noise_stream(jobs[k].t, jobs[k].j, cfg.offsets.size()));
    io::write_cloud(noisy, out.synth_scan(cfg.sequence_id, jobs[k].t, v.offset_m));
  });
  double mean = 0.0;
  for (double r : ratios) mean += r;
  if (!ratios.empty()) mean /= static_cast<double>(ratios.size());
  return {{"scans", jobs.size()}, {"directions", model.direction_count()}, {"mean_hit_ratio", mean}};
}

/// Original scans (offset 0), synthesized scans and labels -> dataset/.
inline json export_stage(const PipelineConfig& cfg) {
  const Layout out{cfg.output_dir};
  require(out.labels());
  const auto seq = io::load_sequence(io::read_manifest(cfg.manifest));
  const auto records = read_labels(out.labels());
  std::vector<io::DatasetSample> samples(records.size());
  parallel_for(records.size(), cfg.worker_count(), [&](std::size_t i) {
    const auto& r = records[i];
    auto& s = samples[i];
    if (r.offset_m == 0.0) {
      if (r.timestep >= seq.size()) fail(ErrorCode::kInvalidInput, fmt::format("label for missing scan {}", r.timestep));
      s.cloud = seq.scans[r.timestep];
    } else {
      const fs::path p = out.synth_scan(cfg.sequence_id, r.timestep, r.offset_m);
      require(p);
      s.cloud = io::read_cloud(p);
    }
    s.label = r.label;
    s.sequence_id = cfg.sequence_id;
    s.timestep = r.timestep;
    s.offset_m = r.offset_m;
  });
  ensure_dir(out.dataset_dir());
  clear_ply(out.dataset_dir());
  const fs::path index = io::export_dataset(samples, out.dataset_dir(), cfg.worker_count());
  return {{"samples", samples.size()}, {"index", index.string()}};
}

struct Stage {
  const char* name;
  std::function<json(const PipelineConfig&)> run;
};

inline const std::vector<Stage>& stages() {
  static const std::vector<Stage> all{{"odometry", odometry_stage},   {"accumulate", accumulate_stage},
                                      {"mesh", mesh_stage},           {"label", label_stage},
                                      {"synthesize", synthesize_stage}, {"export", export_stage}};
  return all;
}

/// Runs one stage, prefixing any error with the stage name.
inline json run_stage(const Stage& stage, const PipelineConfig& cfg) {
  try {
    return stage.run(cfg);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("stage {}: {}", stage.name, e.message()));
  }
}

/// All stages in order. The manifest is checked before anything is written;
/// a `.partial` marker stays in the output directory if a stage fails.
inline json run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const auto manifest = io::read_manifest(cfg.manifest);
  (void)cfg.beam_model(manifest.sensor_preset);
  const Layout out{cfg.output_dir};
  ensure_dir(out.dir);
  {
    std::ofstream marker(out.partial_marker(), std::ios::trunc);
    if (!marker) fail(ErrorCode::kIo, "cannot write " + out.partial_marker().string());
  }
  json report{{"stages", json::array()}};
  double total = 0.0;
  for (const auto& stage : stages()) {
    const auto start = std::chrono::steady_clock::now();
    json stats = run_stage(stage, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    total += seconds;
    report["stages"].push_back({{"name", stage.name}, {"seconds", seconds}, {"stats", std::move(stats)}});
  }
  report["seconds"] = total;
  report["artifacts"] = {{"trajectory", out.trajectory().string()}, {"fused", out.fused().string()},
                         {"mesh", out.mesh().string()},             {"labels", out.labels().string()},
                         {"synth", out.synth_dir().string()},       {"dataset", out.dataset_dir().string()}};
  std::ofstream rep(out.report(), std::ios::trunc);
  rep << report.dump(2) << '\n';
  if (!rep) fail(ErrorCode::kIo, "cannot write " + out.report().string());
  fs::remove(out.partial_marker());
  return report;
}

}  // namespace lidarsyn::pipeline
