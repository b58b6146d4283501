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


// Command-line front end: the full pipeline, its stages, and the synthetic
// testbed.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "lidarsyn/labels/controller.hpp"
#include "lidarsyn/pipeline/config.hpp"
#include "lidarsyn/pipeline/outputs.hpp"
#include "lidarsyn/pipeline/pipeline.hpp"
#include "lidarsyn/testbed/evaluate.hpp"
#include "lidarsyn/testbed/scene_json.hpp"
#include "lidarsyn/testbed/simulate.hpp"

namespace {

using namespace lidarsyn;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values; unset ones leave the config file (or defaults) alone.
struct Overrides {
  std::string config;
  std::string manifest, output, trajectory, preset;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<int> sequence_id;
  std::optional<double> elevation_sign, noise_sigma, drop, dedup_voxel;
  std::vector<double> offsets, radii;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-m,--manifest", o.manifest, "scan manifest");
  app.add_option("-o,--output", o.output, "output directory");
  app.add_option("--trajectory", o.trajectory, "use these poses instead of running ICP");
  app.add_option("--preset", o.preset, "sensor preset name");
  app.add_option("-j,--workers", o.workers, "worker threads (0: all cores)");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--sequence-id", o.sequence_id, "sequence id used in sample names");
  app.add_option("--elevation-sign", o.elevation_sign, "-1: depression angles, +1: literal elevations");
  app.add_option("--noise-sigma", o.noise_sigma, "Gaussian jitter of synthesized points, m");
  app.add_option("--drop", o.drop, "drop probability of synthesized points");
  app.add_option("--dedup-voxel", o.dedup_voxel, "voxel size for dedup before meshing, m (0: off)");
  app.add_option("--offsets", o.offsets, "lateral offsets, m")->delimiter(',');
  app.add_option("--radii", o.radii, "ball radii, m, ascending")->delimiter(',');
}

pipeline::PipelineConfig resolve(const Overrides& o) {
  try {
    pipeline::PipelineConfig cfg = o.config.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(o.config);
    if (!o.manifest.empty()) cfg.manifest = o.manifest;
    if (!o.output.empty()) cfg.output_dir = o.output;
    if (!o.trajectory.empty()) cfg.trajectory = o.trajectory;
    if (!o.preset.empty()) cfg.beam.preset = o.preset;
    if (o.workers) cfg.workers = *o.workers;
    if (o.seed) cfg.seed = *o.seed;
    if (o.sequence_id) cfg.sequence_id = *o.sequence_id;
    if (o.elevation_sign) cfg.beam.elevation_sign = *o.elevation_sign;
    if (o.noise_sigma) cfg.noise.sigma = *o.noise_sigma;
    if (o.drop) cfg.noise.drop_probability = *o.drop;
    if (o.dedup_voxel) cfg.bpa.dedup_voxel = *o.dedup_voxel;
    if (!o.offsets.empty()) cfg.offsets = o.offsets;
    if (!o.radii.empty()) cfg.bpa.radii = o.radii;
    cfg.noise.seed = cfg.seed;
    cfg.validate();
    return cfg;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void need_manifest(const pipeline::PipelineConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("no manifest given (--manifest or input.manifest)");
}

void print_stats(const char* stage, const nlohmann::json& stats) {
  fmt::print(stderr, "{}: {}\n", stage, stats.dump());
}

int run_stage_command(const char* name, const pipeline::PipelineConfig& cfg) {
  for (const auto& s : pipeline::stages()) {
    if (std::string(s.name) == name) {
      print_stats(name, pipeline::run_stage(s, cfg));
      return kOk;
    }
  }
  return kInternal;
}

struct SceneOptions {
  std::string kind = "straight";
  double length = 49.0;
  double lane_width = 3.5;
  std::uint64_t scene_seed = 0;
  std::string scene_file;
};

int gen_scene(const SceneOptions& so, const pipeline::PipelineConfig& cfg, const std::string& preset) {
  testbed::SceneParams p;
  try {
    p.kind = testbed::parse_scene_kind(so.kind);
    p.length = so.length;
    p.lane_width = so.lane_width;
    p.seed = so.scene_seed;
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const std::string preset_name = preset.empty() ? "default" : preset;
  const BeamModel model = cfg.beam_model(preset_name);
  const auto scene = testbed::generate_scene(p);
  const auto seq = testbed::simulate_sequence(scene, model, cfg.noise, cfg.worker_count());

  const fs::path dir = cfg.output_dir;
  pipeline::ensure_dir(dir / "scans");
  testbed::write_scene_params(p, dir / "scene.json");
  io::write_mesh(scene.mesh, dir / "scene_mesh.ply");
  io::write_trajectory(scene.ground_truth, dir / "ground_truth.txt");
  io::SequenceManifest manifest;
  manifest.frequency_hz = seq.frequency_hz;
  manifest.sensor_preset = preset_name;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const fs::path rel = fs::path("scans") / fmt::format("scan_{:04d}.ply", i);
    io::write_cloud(seq.scans[i], dir / rel);
    manifest.scan_paths.push_back(rel);
  }
  io::write_manifest(manifest, dir / "manifest.txt");
  fmt::print(stderr, "gen-scene: {} scans, {} triangles -> {}\n", seq.size(), scene.mesh.triangles.size(),
             (dir / "manifest.txt").string());
  return kOk;
}

int evaluate(const SceneOptions& so, const pipeline::PipelineConfig& cfg, const std::string& report_path) {
  if (so.scene_file.empty()) throw ConfigError("evaluate needs --scene <scene.json>");
  need_manifest(cfg);
  const auto scene = testbed::generate_scene(testbed::read_scene_params(so.scene_file));
  const auto manifest = io::read_manifest(cfg.manifest);
  const auto seq = io::load_sequence(manifest);
  testbed::EvaluationOptions opt;
  opt.bpa = cfg.bpa;
  opt.model = cfg.beam_model(manifest.sensor_preset);
  opt.labels = cfg.labels;
  opt.workers = cfg.worker_count();
  const auto report = testbed::evaluate_pipeline(scene, seq, pipeline::load_outputs(cfg), opt);
  const fs::path out = report_path.empty() ? cfg.output_dir / "evaluation.json" : fs::path(report_path);
  std::ofstream f(out, std::ios::trunc);
  f << testbed::to_json(report).dump(2) << '\n';
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + out.string());
  fmt::print(stderr,
             "evaluate: max translation {:.4f} m, max rotation {:.4f} deg, drift {:.4f}, road hausdorff {:.4f} m, "
             "synthesis p95 {:.4f} m, coverage {:.4f} single / {:.4f} accumulated, label p95 {:.4f} m -> {}\n",
             report.max_translation_error_m, report.max_rotation_error_deg, report.drift_ratio,
             report.road_hausdorff_m, report.synthesis_error_m.p95, report.coverage_single,
             report.coverage_accumulated, report.label_error_m.p95, out.string());
  return kOk;
}

int dump_labels(const pipeline::PipelineConfig& cfg) {
  const pipeline::Layout out{cfg.output_dir};
  fmt::print("# timestep offset_m x1 y1 x2 y2 x3 y3 x4 y4 steering throttle brake\n");
  for (const auto& r : pipeline::read_labels(out.labels())) {
    const double speed = desired_speed(r.label, cfg.pid);
    const auto [cmd, state] = waypoints_to_control(r.label, speed, PidState{}, cfg.pid);
    fmt::print("{} {:+.1f}", r.timestep, r.offset_m + 0.0);
    for (const auto& w : r.label.waypoints) fmt::print(" {:.6f} {:.6f}", w.x(), w.y());
    fmt::print(" {:.6f} {:.6f} {}\n", cmd.steering, cmd.throttle, cmd.brake);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR view synthesis and waypoint labeling pipeline"};
  app.require_subcommand(1);
  Overrides o;
  SceneOptions so;
  std::string report_path;
  bool dump = false;

  auto* run = app.add_subcommand("run", "all stages: odometry through export");
  auto* odometry = app.add_subcommand("odometry", "scans -> trajectory.txt");
  auto* accumulate_cmd = app.add_subcommand("accumulate", "scans + trajectory -> fused.ply");
  auto* mesh = app.add_subcommand("mesh", "fused.ply -> mesh.ply");
  auto* synthesize = app.add_subcommand("synthesize", "mesh.ply -> synth/*.ply at lateral offsets");
  auto* label = app.add_subcommand("label", "trajectory -> labels.txt");
  auto* export_cmd = app.add_subcommand("export", "scans + synth + labels -> dataset/");
  auto* gen = app.add_subcommand("gen-scene", "synthetic scene, ground truth and scans");
  auto* eval = app.add_subcommand("evaluate", "compare pipeline outputs with a synthetic scene");
  for (auto* sub : {run, odometry, accumulate_cmd, mesh, synthesize, label, export_cmd, gen, eval}) add_common(*sub, o);
  label->add_flag("--dump", dump, "print labels with controller commands");
  gen->add_option("--kind", so.kind, "straight | arc | s-curve");
  gen->add_option("--length", so.length, "trajectory length, m");
  gen->add_option("--lane-width", so.lane_width, "lane width, m");
  gen->add_option("--scene-seed", so.scene_seed, "seed for barrier and post layout");
  eval->add_option("--scene", so.scene_file, "scene.json written by gen-scene");
  eval->add_option("--report", report_path, "evaluation report path (default: <output>/evaluation.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const pipeline::PipelineConfig cfg = resolve(o);
    if (gen->parsed()) return gen_scene(so, cfg, o.preset.empty() ? cfg.beam.preset : o.preset);
    if (eval->parsed()) return evaluate(so, cfg, report_path);
    if (label->parsed() && dump) return dump_labels(cfg);
    const bool needs_manifest = !mesh->parsed() && !label->parsed();
    if (needs_manifest) need_manifest(cfg);
    if (run->parsed()) {
      const auto report = pipeline::run_pipeline(cfg);
      fmt::print(stderr, "run: {} stages in {:.1f} s -> {}\n", report["stages"].size(),
                 report["seconds"].get<double>(), pipeline::Layout{cfg.output_dir}.report().string());
      return kOk;
    }
    for (auto* sub : {odometry, accumulate_cmd, mesh, synthesize, label, export_cmd}) {
      if (sub->parsed()) return run_stage_command(sub->get_name().c_str(), cfg);
    }
    return kInternal;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kInternal;
  }
}
