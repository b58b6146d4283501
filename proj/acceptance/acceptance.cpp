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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion with
// the measured values; exits nonzero if any criterion fails.
//
// usage: lidarsyn_acceptance [work_dir]   (default: a temporary directory)

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <thread>
#include <unistd.h>

#include "lidarsyn/labels/controller.hpp"
#include "lidarsyn/labels/cubic_spline.hpp"
#include "lidarsyn/pipeline/outputs.hpp"
#include "lidarsyn/pipeline/pipeline.hpp"
#include "lidarsyn/testbed/evaluate.hpp"
#include "lidarsyn/testbed/simulate.hpp"

namespace {

using namespace lidarsyn;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

NoiseConfig noise_off() {
  NoiseConfig n;
  n.sigma = 0.0;
  n.drop_probability = 0.0;
  return n;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Scans of a testbed scene written out with a manifest and ground truth.
struct SceneInputs {
  testbed::SyntheticScene scene;
  io::ScanSequence seq;
  fs::path dir;

  fs::path manifest() const { return dir / "manifest.txt"; }
  fs::path ground_truth() const { return dir / "ground_truth.txt"; }
};

SceneInputs write_inputs(const fs::path& dir, testbed::SceneKind kind, const NoiseConfig& noise) {
  testbed::SceneParams p;
  p.kind = kind;
  SceneInputs in{testbed::generate_scene(p), {}, dir};
  in.seq = testbed::simulate_sequence(in.scene, default_beam_model(), noise, workers());
  fs::create_directories(dir / "scans");
  io::SequenceManifest m;
  m.frequency_hz = in.seq.frequency_hz;
  m.sensor_preset = "default";
  for (std::size_t i = 0; i < in.seq.size(); ++i) {
    const fs::path rel = fs::path("scans") / fmt::format("scan_{:04d}.ply", i);
    io::write_cloud(in.seq.scans[i], dir / rel);
    m.scan_paths.push_back(rel);
  }
  io::write_manifest(m, in.manifest());
  io::write_trajectory(in.scene.ground_truth, in.ground_truth());
  return in;
}

pipeline::PipelineConfig run_config(const SceneInputs& in, const fs::path& out, bool ground_truth_poses) {
  pipeline::PipelineConfig cfg;
  cfg.manifest = in.manifest();
  cfg.output_dir = out;
  if (ground_truth_poses) cfg.trajectory = in.ground_truth();
  cfg.workers = workers();
  return cfg;
}

// ---------------------------------------------------------------------------

Outcome odometry_recovery(const fs::path&) {
  Outcome o{true, ""};
  for (auto kind : {testbed::SceneKind::kStraight, testbed::SceneKind::kArc}) {
    testbed::SceneParams p;
    p.kind = kind;
    const auto scene = testbed::generate_scene(p);
    NoiseConfig noise;  // 0.02 m, 20% drop
    const auto seq = testbed::simulate_sequence(scene, default_beam_model(), noise, workers());
    const auto t0 = std::chrono::steady_clock::now();
    const Trajectory est = estimate_trajectory(seq, IcpConfig{}, workers());
    const double secs = seconds_since(t0);
    testbed::EvaluationReport r;
    testbed::odometry_error(est, scene.ground_truth, r);
    const bool ok = r.max_translation_error_m < 0.05 && r.max_rotation_error_deg < 0.5 && r.drift_ratio < 0.01 &&
                    secs < 60.0;
    o.pass = o.pass && ok;
    o.detail += fmt::format("{}{}: trans {:.4f} m, rot {:.4f} deg, drift {:.2f}%, {:.1f} s", o.detail.empty() ? "" : "; ",
                            testbed::to_string(kind),
                            r.max_translation_error_m, r.max_rotation_error_deg, 100.0 * r.drift_ratio, secs);
  }
  return o;
}

Outcome accumulation(const SceneInputs& in) {
  // Exact cases: translations and quarter turns keep every value representable.
  bool exact = true;
  Mat3 yaw90;
  yaw90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  Mat3 flip;
  flip << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  io::ScanSequence seq;
  seq.scans = {PointCloud{{Point3(1, 2, 3), Point3(-0.5, 0.25, 8)}}, PointCloud{{Point3(2, 3, 4)}},
               PointCloud{{Point3(5, 0, -1)}}};
  Trajectory traj{{PoseSE3::identity(), PoseSE3(yaw90, Vec3(1, 1, 0)), PoseSE3(flip, Vec3(-3, 0.5, 2))}};
  const std::vector<Point3> want{Point3(1, 2, 3), Point3(-0.5, 0.25, 8), Point3(2, -1, 4), Point3(-8, 0.5, -3)};
  const auto fused = accumulate(seq, traj);
  exact = fused.cloud.points == want;

  const auto world = accumulate(in.seq, in.scene.ground_truth, workers());
  std::vector<double> d(world.cloud.size());
  parallel_for(d.size(), workers(), [&](std::size_t i) { d[i] = in.scene.analytic_distance(world.cloud.points[i]); });
  const auto s = testbed::summarize(std::move(d));
  return {exact && s.p95 < 0.02, fmt::format("hand-posed exact: {}; fused {} points, p95 surface distance {:.2e} m",
                                             exact ? "yes" : "no", s.count, s.p95)};
}

Outcome ball_pivoting(const pipeline::PipelineConfig& gt_run, double road_hausdorff) {
  const pipeline::Layout out{gt_run.output_dir};
  const auto fused = io::read_cloud(out.fused());
  const auto mesh = io::read_mesh(out.mesh());
  auto key = [](const Point3& p) { return std::array<double, 3>{p.x(), p.y(), p.z()}; };
  std::set<std::array<double, 3>> input;
  for (const auto& p : fused.points) input.insert(key(p));
  std::size_t foreign = 0;
  for (const auto& v : mesh.vertices) foreign += !input.contains(key(v));

  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) ++edges[{std::min(t[e], t[(e + 1) % 3]), std::max(t[e], t[(e + 1) % 3])}];
  }
  int max_share = 0;
  for (const auto& [e, n] : edges) max_share = std::max(max_share, n);

  bool grids = true;
  for (auto [n, m] : {std::pair{5, 7}, std::pair{20, 13}, std::pair{40, 40}}) {
    FusedCloud g;
    g.cloud.frame = Frame::kWorld;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) g.cloud.points.push_back({0.1 * i, 0.1 * j, 0.0});
    }
    BpaConfig cfg;
    cfg.radii = {0.15};
    cfg.dedup_voxel = 0.0;
    grids = grids && reconstruct_mesh(g, cfg).triangles.size() == static_cast<std::size_t>(2 * (n - 1) * (m - 1));
  }
  return {foreign == 0 && max_share <= 2 && grids && road_hausdorff < 0.1,
          fmt::format("{} vertices, {} not in input; max triangles per edge {}; grid counts {}; road Hausdorff "
                      "{:.4f} m",
                      mesh.vertices.size(), foreign, max_share, grids ? "exact" : "WRONG", road_hausdorff)};
}

Outcome beam_model() {
  const BeamModel m = default_beam_model();
  const auto dirs = build_directions(m);
  double worst = 0.0;
  for (const auto& d : dirs) worst = std::max(worst, std::abs(d.norm() - 1.0));
  const bool count = dirs.size() == static_cast<std::size_t>(m.azimuth_count) * m.elevations.size();

  bool quarter = true;
  const double expected[4][2] = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}};
  for (int q = 0; q < 4; ++q) {
    double s, c;
    sin_cos_turns(0.25 * q, s, c);
    quarter = quarter && s == expected[q][0] && c == expected[q][1];
  }
  double s, c;
  sin_cos_turns(0.25, s, c);
  quarter = quarter && beam_direction(c, s, 0.0) == Vec3(0, 1, 0);
  // Azimuth zero reduces the direction to (cos t, 0, sin t).
  sin_cos_turns(0.0, s, c);
  const Vec3 sub = beam_direction(c, s, -kPi / 6.0);
  const bool substitution = sub == Vec3(std::cos(-kPi / 6.0), 0.0, std::sin(-kPi / 6.0));

  const auto e = log_spaced_elevations(64, kPi / 64.0, kPi / 3.0, 1.0);
  const bool ends = e.front() == kPi / 64.0 && e.back() == kPi / 3.0;
  return {worst <= 1e-12 && count && quarter && substitution && ends,
          fmt::format("{} directions, max |norm-1| {:.1e}; quarter turns {}; substitution {}; endpoints {}",
                      dirs.size(), worst, quarter ? "exact" : "WRONG", substitution ? "exact" : "WRONG",
                      ends ? "exact" : "WRONG")};
}

Outcome ray_casting(const SceneInputs& in) {
  TriangleMesh plane;
  plane.vertices = {Point3(-100, -100, 0), Point3(100, -100, 0), Point3(100, 100, 0), Point3(-100, 100, 0)};
  plane.triangles = {{0, 1, 2}, {0, 2, 3}};
  const auto hit = BvhIndex(plane).first_hit({0, 0, 2}, Vec3(std::cos(-kPi / 6), 0, std::sin(-kPi / 6)));
  const double range_err = hit ? std::abs(hit->t - 4.0) : INFINITY;

  const auto& mesh = in.scene.mesh;
  const BvhIndex bvh(mesh);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(-5, 55), y(-15, 15), z(-1, 4);
  std::normal_distribution<double> g;
  std::size_t mismatches = 0, hits = 0;
  double worst = 0.0;
  for (int r = 0; r < 10000; ++r) {
    const Point3 o(x(rng), y(rng), z(rng));
    const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
    double best = INFINITY;
    for (const auto& t : mesh.triangles) {
      const Point3& a = mesh.vertices[t[0]];
      if (const auto h = intersect_ray_triangle(o, d, a, mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a)) {
        best = std::min(best, *h);
      }
    }
    const auto got = bvh.first_hit(o, d);
    if (bool(got) != std::isfinite(best)) {
      ++mismatches;
    } else if (got) {
      ++hits;
      worst = std::max(worst, std::abs(got->t - best));
    }
  }
  return {range_err <= 1e-9 && mismatches == 0 && worst <= 1e-9,
          fmt::format("plane range error {:.1e}; 10000 rays ({} hits): {} hit/miss mismatches, max range diff {:.1e}",
                      range_err, hits, mismatches, worst)};
}

Outcome noise_model() {
  const std::size_t n = 100000;
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) cloud.points.push_back(Point3(static_cast<double>(i), 0, 0));
  NoiseConfig cfg;
  cfg.seed = 11;
  const auto noisy = apply_noise(cloud, cfg, 3);
  const double drop = 1.0 - static_cast<double>(noisy.size()) / static_cast<double>(n);

  // Survivors keep their order, so recover each source point by its x index.
  std::vector<double> e;
  for (const auto& p : noisy.points) {
    const double i = std::round(p.x());
    e.insert(e.end(), {p.x() - i, p.y(), p.z()});
  }
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  double var = 0.0;
  for (double v : e) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(e.size() - 1));
  // Four standard errors of the sample mean and of the sample deviation.
  const double m = static_cast<double>(e.size());
  const double mean_bound = 4.0 * cfg.sigma / std::sqrt(m);
  const double sd_bound = 4.0 * cfg.sigma / std::sqrt(2.0 * (m - 1));
  return {drop >= 0.18 && drop <= 0.22 && std::abs(mean) <= mean_bound && std::abs(sd - cfg.sigma) <= sd_bound,
          fmt::format("drop {:.4f}; mean {:+.2e} (bound {:.1e}); stddev {:.5f} vs {:.3f} (bound {:.1e})", drop, mean,
                      mean_bound, sd, cfg.sigma, sd_bound)};
}

Trajectory straight_line(int n) {
  Trajectory t;
  for (int i = 0; i < n; ++i) t.poses.push_back(PoseSE3::from_translation({-static_cast<double>(i), 0, 0}));
  return t;
}

double label_distance(const WaypointLabel& a, const WaypointLabel& b) {
  double d = 0.0;
  for (int k = 0; k < 4; ++k) d = std::max(d, (a[k] - b[k]).norm());
  return d;
}

Outcome labels(const SceneInputs& arc_scene) {
  const LabelConfig lc;
  const auto ref = reference_label(straight_line(30), 0, lc);
  WaypointLabel want;
  for (int k = 0; k < 4; ++k) want[k] = Vec2(5.0 * (k + 1), 0.0);
  const double straight_err = label_distance(ref, want);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-30, 30);
  double knot_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x{0.0, 3.0, 4.0}, y{0.0, u(rng), u(rng)};
    const NaturalCubicSpline s(x, y);
    for (int k = 0; k < 3; ++k) knot_err = std::max(knot_err, std::abs(s(x[k]) - y[k]));
  }

  const Trajectory& gt = arc_scene.scene.ground_truth;
  double continuity = 0.0;  // worst ratio of label change to offset
  for (std::size_t t : {0u, 12u, 29u}) {
    const auto at_zero = offset_label(gt, t, gt[t], lc);
    for (double o : {1e-3, -1e-4, 1e-6}) {
      continuity = std::max(continuity, label_distance(offset_label(gt, t, lateral_offset_pose(gt[t], o), lc), at_zero) /
                                            std::abs(o));
    }
  }

  double rigid = 0.0;
  std::uniform_real_distribution<double> yaw(-kPi, kPi), shift(-100, 100);
  for (int trial = 0; trial < 10; ++trial) {
    Mat3 r = Eigen::AngleAxisd(yaw(rng), Vec3::UnitZ()).toRotationMatrix();
    const PoseSE3 g(r, Vec3(shift(rng), shift(rng), shift(rng)));
    Trajectory moved;
    for (const auto& p : gt.poses) moved.poses.push_back(p * g.inverse());
    for (std::size_t t = 0; t < labelable_count(gt.size(), lc); t += 7) {
      rigid = std::max(rigid, label_distance(reference_label(moved, t, lc), reference_label(gt, t, lc)));
      for (double o : {-2.0, 1.2}) {
        rigid = std::max(rigid, label_distance(offset_label(moved, t, lateral_offset_pose(moved[t], o), lc),
                                               offset_label(gt, t, lateral_offset_pose(gt[t], o), lc)));
      }
    }
  }
  return {straight_err <= 1e-12 && knot_err <= 1e-12 && continuity < 10.0 && rigid <= 1e-9,
          fmt::format("straight label error {:.1e}; knot error {:.1e}; label change per meter of offset {:.3f}; rigid "
                      "motion change {:.1e}",
                      straight_err, knot_err, continuity, rigid)};
}

Outcome controller() {
  const PidConfig cfg;
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-40, 40), speed(0, 40);
  PidState state;
  std::size_t out_of_range = 0;
  for (int i = 0; i < 10000; ++i) {
    WaypointLabel l;
    for (auto& w : l.waypoints) w = Vec2(u(rng), u(rng));
    const auto [cmd, next] = waypoints_to_control(l, speed(rng), state, cfg);
    state = next;
    out_of_range += !(cmd.steering >= -1 && cmd.steering <= 1 && cmd.throttle >= 0 && cmd.throttle <= 1);
  }
  WaypointLabel ahead;
  for (int k = 0; k < 4; ++k) ahead[k] = Vec2(5.0 * (k + 1), 0.0);
  const auto straight = waypoints_to_control(ahead, desired_speed(ahead, cfg), PidState{}, cfg).first;
  WaypointLabel right;
  for (int k = 0; k < 4; ++k) right[k] = Vec2(0.0, 1.0 + k);
  const auto hard = waypoints_to_control(right, 0.0, PidState{}, cfg).first;
  return {out_of_range == 0 && straight.steering == 0.0 && hard.steering == 1.0,
          fmt::format("{} of 10000 commands out of range; straight steering {}; hard-right steering {}", out_of_range,
                      straight.steering, hard.steering)};
}

}  // namespace

int main(int argc, char** argv) {
  const bool temporary = argc < 2;
  const fs::path work = temporary ? fs::temp_directory_path() / fmt::format("lidarsyn_acceptance_{}", ::getpid())
                                  : fs::path(argv[1]);
  fs::create_directories(work);
  std::vector<std::pair<std::string, Outcome>> results;
  auto check = [&](const std::string& name, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    fmt::print("{} {:<2} {} ({}; {:.1f} s)\n", o.pass ? "PASS" : "FAIL", results.size() + 1, name, o.detail,
               seconds_since(t0));
    std::fflush(stdout);
    results.emplace_back(name, o);
  };

  // Shared inputs: noise-free straight-scene scans, and the arc scene for labels.
  const SceneInputs clean = write_inputs(work / "straight_clean", testbed::SceneKind::kStraight, noise_off());
  testbed::SceneParams arc_params;
  arc_params.kind = testbed::SceneKind::kArc;
  const SceneInputs arc{testbed::generate_scene(arc_params), {}, {}};

  // Noise-free end-to-end runs; pipeline noise is off so the error measures geometry alone.
  pipeline::PipelineConfig gt_run = run_config(clean, work / "run_gt", true);
  pipeline::PipelineConfig icp_run = run_config(clean, work / "run_icp", false);
  gt_run.noise.sigma = icp_run.noise.sigma = 0.0;
  testbed::EvaluationOptions eval_opt;
  eval_opt.workers = workers();
  double gt_seconds = 0.0, icp_seconds = 0.0;
  std::optional<testbed::EvaluationReport> gt_eval, icp_eval;
  std::string run_error;
  try {
    auto t0 = std::chrono::steady_clock::now();
    pipeline::run_pipeline(gt_run);
    gt_seconds = seconds_since(t0);
    gt_eval = testbed::evaluate_pipeline(clean.scene, clean.seq, pipeline::load_outputs(gt_run), eval_opt);
    t0 = std::chrono::steady_clock::now();
    pipeline::run_pipeline(icp_run);
    icp_seconds = seconds_since(t0);
    icp_eval = testbed::evaluate_pipeline(clean.scene, clean.seq, pipeline::load_outputs(icp_run), eval_opt);
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  auto need_runs = [&] {
    if (!run_error.empty()) throw std::runtime_error("end-to-end run failed: " + run_error);
  };

  check("odometry recovery", [&] { return odometry_recovery(work); });
  check("accumulation", [&] { return accumulation(clean); });
  check("ball pivoting", [&] {
    need_runs();
    return ball_pivoting(gt_run, gt_eval->road_hausdorff_m);
  });
  check("beam model", beam_model);
  check("ray casting", [&] { return ray_casting(clean); });
  check("noise model", noise_model);
  check("labels", [&] { return labels(arc); });
  check("accumulated vs single-scan coverage", [&] {
    need_runs();
    return Outcome{gt_eval->coverage_accumulated > gt_eval->coverage_single,
                   fmt::format("hit ratio at +2 m, timestep {}: accumulated {:.4f}, single {:.4f}",
                               gt_eval->coverage_timestep, gt_eval->coverage_accumulated, gt_eval->coverage_single)};
  });
  check("end-to-end synthesis error", [&] {
    need_runs();
    const double g = gt_eval->synthesis_error_m.p95, i = icp_eval->synthesis_error_m.p95;
    return Outcome{g < 0.05 && i < 0.10 && gt_seconds < 600 && icp_seconds < 600,
                   fmt::format("p95 with true poses {:.4f} m ({:.0f} s run), with ICP poses {:.4f} m ({:.0f} s run)", g,
                               gt_seconds, i, icp_seconds)};
  });
  check("determinism", [&] {
    // Pipeline noise on, so the seed matters.
    std::string index[2];
    const unsigned counts[2] = {1, 4};
    for (int k = 0; k < 2; ++k) {
      pipeline::PipelineConfig cfg = run_config(clean, work / fmt::format("run_workers_{}", counts[k]), true);
      cfg.workers = counts[k];
      cfg.seed = cfg.noise.seed = 2024;
      pipeline::run_pipeline(cfg);
      index[k] = slurp(pipeline::Layout{cfg.output_dir}.dataset_dir() / io::kIndexFileName);
    }
    return Outcome{!index[0].empty() && index[0] == index[1],
                   fmt::format("index.txt with 1 and 4 workers: {} bytes, {}", index[0].size(),
                               index[0] == index[1] ? "identical" : "DIFFERENT")};
  });
  check("controller", controller);

  if (temporary) fs::remove_all(work);
  std::size_t passed = 0;
  for (const auto& [name, o] : results) passed += o.pass;
  fmt::print("{}/{} criteria passed\n", passed, results.size());
  return passed == results.size() ? 0 : 1;
}
