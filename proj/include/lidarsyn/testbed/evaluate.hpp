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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "lidarsyn/core/bvh_index.hpp"
#include "lidarsyn/core/error.hpp"
#include "lidarsyn/io/sequence.hpp"
#include "lidarsyn/labels/waypoints.hpp"
#include "lidarsyn/scene/accumulate.hpp"
#include "lidarsyn/scene/ball_pivoting.hpp"
#include "lidarsyn/synthesis/synthesize.hpp"
#include "lidarsyn/synthesis/viewpoints.hpp"
#include "lidarsyn/testbed/scene.hpp"

namespace lidarsyn::testbed {

struct SynthesizedScan {
  std::size_t timestep = 0;
  double offset_m = 0.0;
  PoseSE3 pose;      // virtual sensor pose, world-to-sensor
  PointCloud cloud;  // sensor frame
};

struct LabeledViewpoint {
  std::size_t timestep = 0;
  double offset_m = 0.0;
  WaypointLabel label;
};

/// What a pipeline run leaves behind, in memory.
struct PipelineOutputs {
  Trajectory trajectory;
  TriangleMesh mesh;
  std::vector<SynthesizedScan> scans;
  std::vector<LabeledViewpoint> labels;
};

struct EvaluationOptions {
  double road_margin = 0.25;    // m kept clear of each curb when comparing road surfaces
  double road_spacing = 0.25;   // m between analytic road samples
  double coverage_offset = 2.0;
  std::size_t coverage_timestep = std::numeric_limits<std::size_t>::max();  // default: middle of the sequence
  BpaConfig bpa;
  BeamModel model = default_beam_model();
  LabelConfig labels;
  unsigned workers = 1;
};

struct ErrorSummary {
  std::size_t count = 0;
  double p50 = 0.0, p95 = 0.0, max = 0.0, mean = 0.0;
};

struct EvaluationReport {
  std::vector<double> translation_error_m;  // per pose
  std::vector<double> rotation_error_deg;   // per pose
  double max_translation_error_m = 0.0;
  double max_rotation_error_deg = 0.0;
  double drift_ratio = 0.0;  // final position error over ground-truth path length
  double road_hausdorff_m = 0.0;
  ErrorSummary synthesis_error_m;
  std::size_t coverage_timestep = 0;
  double coverage_single = 0.0;
  double coverage_accumulated = 0.0;
  ErrorSummary label_error_m;  // per waypoint
};

/// Nearest-rank percentile summary; empty input gives all zeros.
inline ErrorSummary summarize(std::vector<double> values) {
  ErrorSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(k, 1) - 1];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

inline nlohmann::json to_json(const ErrorSummary& s) {
  return {{"count", s.count}, {"p50", s.p50}, {"p95", s.p95}, {"max", s.max}, {"mean", s.mean}};
}

inline nlohmann::json to_json(const EvaluationReport& r) {
  return {
      {"odometry",
       {{"translation_error_m", r.translation_error_m},
        {"rotation_error_deg", r.rotation_error_deg},
        {"max_translation_error_m", r.max_translation_error_m},
        {"max_rotation_error_deg", r.max_rotation_error_deg},
        {"drift_ratio", r.drift_ratio}}},
      {"mesh", {{"road_hausdorff_m", r.road_hausdorff_m}}},
      {"synthesis_error_m", to_json(r.synthesis_error_m)},
      {"coverage",
       {{"timestep", r.coverage_timestep}, {"single_scan", r.coverage_single}, {"accumulated", r.coverage_accumulated}}},
      {"label_error_m", to_json(r.label_error_m)},
  };
}

/// Per-pose odometry error of `estimate` against the scene's ground truth.
inline void odometry_error(const Trajectory& estimate, const Trajectory& truth, EvaluationReport& r) {
  if (estimate.size() != truth.size()) {
    fail(ErrorCode::kInvalidInput,
         fmt::format("trajectory has {} poses, ground truth has {}", estimate.size(), truth.size()));
  }
  r.translation_error_m.clear();
  r.rotation_error_deg.clear();
  double path = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double te = (estimate[i].origin_in_world() - truth[i].origin_in_world()).norm();
    const double re = PoseSE3::rotation_angle_between(estimate[i], truth[i]) * 180.0 / std::numbers::pi;
    r.translation_error_m.push_back(te);
    r.rotation_error_deg.push_back(re);
    r.max_translation_error_m = std::max(r.max_translation_error_m, te);
    r.max_rotation_error_deg = std::max(r.max_rotation_error_deg, re);
    if (i > 0) path += (truth[i].origin_in_world() - truth[i - 1].origin_in_world()).norm();
  }
  r.drift_ratio = path > 0 ? r.translation_error_m.back() / path : 0.0;
}

/// Symmetric Hausdorff distance between `mesh` and the analytic road surface,
/// restricted to the road strip between the first and last trajectory
/// stations and kept `margin` away from the curbs.
inline double road_hausdorff(const SyntheticScene& scene, const TriangleMesh& mesh, double margin, double spacing,
                             unsigned workers = 1) {
  if (mesh.triangles.empty()) fail(ErrorCode::kInvalidInput, "mesh has no triangles");
  const auto& p = scene.params;
  const Centerline line(p.kind, p.length, p.radius);
  const double l0 = scene.road_left() + margin, l1 = scene.road_right() - margin;
  const double z = scene.road_z();
  auto in_region = [&](const Point3& q) {
    const Vec2 sl = line.project({q.x(), q.y()});
    return sl.x() >= 0.0 && sl.x() <= p.length && sl.y() >= l0 && sl.y() <= l1;
  };

  // Surface to mesh.
  const BvhIndex bvh(mesh);
  std::vector<Point3> samples;
  const int ns = static_cast<int>(std::floor(p.length / spacing)) + 1;
  const int nl = static_cast<int>(std::floor((l1 - l0) / spacing)) + 1;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nl; ++j) samples.push_back(line.at(std::min(i * spacing, p.length), l0 + j * spacing, z));
  }
  std::vector<double> d(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) { d[i] = bvh.closest_point(samples[i]).distance; });
  double h = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());

  // Mesh to surface: vertices, edge midpoints and centroids over the region.
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point3& a = mesh.vertices[tri[0]];
    const Point3& b = mesh.vertices[tri[1]];
    const Point3& c = mesh.vertices[tri[2]];
    for (const Point3& q : {a, b, c, Point3(0.5 * (a + b)), Point3(0.5 * (b + c)), Point3(0.5 * (c + a)),
                            Point3((a + b + c) / 3.0)}) {
      if (in_region(q)) h = std::max(h, std::abs(q.z() - z));
    }
  }
  return h;
}

/// Fraction of beams that hit `mesh` from `pose`.
inline double coverage(const TriangleMesh& mesh, const PoseSE3& pose, const BeamModel& model, unsigned workers = 1) {
  const BvhIndex bvh(mesh);
  return hit_ratio(synthesize_scan(bvh, pose, model, workers), model);
}

/// Mesh built from the scans in `timesteps` alone, using `traj` for alignment.
inline TriangleMesh partial_mesh(const io::ScanSequence& seq, const Trajectory& traj,
                                 const std::vector<std::size_t>& timesteps, const BpaConfig& cfg,
                                 unsigned workers = 1) {
  io::ScanSequence sub;
  sub.frequency_hz = seq.frequency_hz;
  Trajectory sub_traj;
  std::vector<Point3> viewpoints;
  for (std::size_t t : timesteps) {
    if (t >= seq.size() || t >= traj.size()) fail(ErrorCode::kOutOfRange, fmt::format("timestep {} out of range", t));
    sub.scans.push_back(seq.scans[t]);
    sub_traj.poses.push_back(traj[t]);
    viewpoints.push_back(traj[t].origin_in_world());
  }
  return reconstruct_mesh(accumulate(sub, sub_traj, workers), cfg, viewpoints, nullptr, workers);
}

/// Compares pipeline outputs against the scene's analytic geometry and
/// ground-truth trajectory.
inline EvaluationReport evaluate_pipeline(const SyntheticScene& scene, const io::ScanSequence& seq,
                                          const PipelineOutputs& out, const EvaluationOptions& opt = {}) {
  if (out.trajectory.empty()) fail(ErrorCode::kInvalidInput, "missing artifact: trajectory");
  if (out.mesh.triangles.empty()) fail(ErrorCode::kInvalidInput, "missing artifact: mesh");
  if (out.labels.empty()) fail(ErrorCode::kInvalidInput, "missing artifact: labels");
  if (seq.size() != scene.ground_truth.size()) {
    fail(ErrorCode::kInvalidInput, "scan sequence does not match the scene's ground truth");
  }
  EvaluationReport r;
  odometry_error(out.trajectory, scene.ground_truth, r);
  r.road_hausdorff_m = road_hausdorff(scene, out.mesh, opt.road_margin, opt.road_spacing, opt.workers);

  const BvhIndex truth(scene.mesh);
  std::vector<std::vector<double>> per_scan(out.scans.size());
  parallel_for(out.scans.size(), opt.workers, [&](std::size_t i) {
    const auto& s = out.scans[i];
    per_scan[i].reserve(s.cloud.size());
    for (const auto& q : s.cloud.points) per_scan[i].push_back(truth.closest_point(s.pose.apply_inverse(q)).distance);
  });
  std::vector<double> errors;
  for (auto& v : per_scan) errors.insert(errors.end(), v.begin(), v.end());
  r.synthesis_error_m = summarize(std::move(errors));

  r.coverage_timestep = opt.coverage_timestep < seq.size() ? opt.coverage_timestep : seq.size() / 2;
  const PoseSE3 probe = lateral_offset_pose(out.trajectory[r.coverage_timestep], opt.coverage_offset);
  const TriangleMesh single = partial_mesh(seq, out.trajectory, {r.coverage_timestep}, opt.bpa, opt.workers);
  r.coverage_single = coverage(single, probe, opt.model, opt.workers);
  r.coverage_accumulated = coverage(out.mesh, probe, opt.model, opt.workers);

  std::vector<double> label_errors;
  for (const auto& l : out.labels) {
    const WaypointLabel oracle =
        l.offset_m == 0.0
            ? reference_label(scene.ground_truth, l.timestep, opt.labels)
            : offset_label(scene.ground_truth, l.timestep,
                           lateral_offset_pose(scene.ground_truth[l.timestep], l.offset_m), opt.labels);
    for (int k = 0; k < 4; ++k) label_errors.push_back((l.label[k] - oracle[k]).norm());
  }
  r.label_error_m = summarize(std::move(label_errors));
  return r;
}

}  // namespace lidarsyn::testbed
