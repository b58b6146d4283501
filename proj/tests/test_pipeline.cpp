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


#include <gtest/gtest.h>

#include "lidarsyn/pipeline/outputs.hpp"
#include "lidarsyn/pipeline/pipeline.hpp"
#include "lidarsyn/testbed/simulate.hpp"
#include "support.hpp"

using namespace lidarsyn;
using namespace lidarsyn::pipeline;
namespace fs = std::filesystem;

namespace {

// A short straight scene with a small sensor so full runs take seconds.
struct SmallRun {
  test::TempDir dir{"pipeline"};
  PipelineConfig cfg;

  SmallRun() {
    testbed::SceneParams p;
    p.length = 14.0;
    const auto scene = testbed::generate_scene(p);
    cfg.sensor_presets["tiny"] = SensorPreset{256, 16};
    const auto seq = testbed::simulate_sequence(scene, cfg.beam_model("tiny"), NoiseConfig{});
    io::SequenceManifest m;
    m.sensor_preset = "tiny";
    fs::create_directories(dir / "in/scans");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const fs::path rel = fs::path("scans") / fmt::format("s{:02d}.ply", i);
      io::write_cloud(seq.scans[i], dir / "in" / rel);
      m.scan_paths.push_back(rel);
    }
    io::write_manifest(m, dir / "in/manifest.txt");
    io::write_trajectory(scene.ground_truth, dir / "in/gt.txt");
    cfg.manifest = dir / "in/manifest.txt";
    cfg.trajectory = dir / "in/gt.txt";
    cfg.output_dir = dir / "out";
    cfg.labels.frame_skip = 2;
    cfg.offsets = {-1.0, 0.0, 1.0};
    cfg.bpa.radii = {0.4, 0.8, 1.6};
  }

  Layout layout() const { return {cfg.output_dir}; }
};

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "report.json") {
      files[fs::relative(e.path(), dir).string()] = test::slurp(e.path());
    }
  }
  return files;
}

}  // namespace

TEST(Pipeline, MissingManifestFailsBeforeWriting) {
  SmallRun run;
  run.cfg.manifest = run.dir / "in/nope.txt";
  try {
    run_pipeline(run.cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("nope.txt"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(run.cfg.output_dir));
}

TEST(Pipeline, MissingScanNamedBeforeWriting) {
  SmallRun run;
  fs::remove(run.dir / "in/scans/s03.ply");
  try {
    run_pipeline(run.cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("s03.ply"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(run.cfg.output_dir));
}

TEST(Pipeline, FullRunProducesEveryArtifact) {
  SmallRun run;
  const auto report = run_pipeline(run.cfg);
  EXPECT_EQ(report["stages"].size(), 6u);
  const Layout out = run.layout();
  EXPECT_FALSE(fs::exists(out.partial_marker()));
  EXPECT_TRUE(fs::exists(out.report()));
  const auto labels = read_labels(out.labels());
  const std::size_t usable = 15 - 8;
  ASSERT_EQ(labels.size(), usable * 3);
  const auto rows = io::read_index(out.dataset_dir() / "index.txt");
  EXPECT_EQ(rows.size(), labels.size());
  std::size_t synth = 0;
  for (const auto& e : fs::directory_iterator(out.synth_dir())) synth += e.path().extension() == ".ply";
  EXPECT_EQ(synth, usable * 2);

  const auto loaded = load_outputs(run.cfg);
  EXPECT_EQ(loaded.labels.size(), labels.size());
  EXPECT_EQ(loaded.scans.size(), usable * 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    EXPECT_EQ(labels[i].label.waypoints, loaded.labels[i].label.waypoints);
  }
}

TEST(Pipeline, StagesComposeToTheFullRun) {
  SmallRun a;
  run_pipeline(a.cfg);
  SmallRun b;
  for (const auto& s : stages()) run_stage(s, b.cfg);
  EXPECT_EQ(snapshot(a.cfg.output_dir), snapshot(b.cfg.output_dir));
}

TEST(Pipeline, DeterministicAcrossWorkerCounts) {
  SmallRun a;
  a.cfg.workers = 1;
  run_pipeline(a.cfg);
  SmallRun b;
  b.cfg.workers = 4;
  run_pipeline(b.cfg);
  const auto sa = snapshot(a.cfg.output_dir);
  EXPECT_EQ(sa, snapshot(b.cfg.output_dir));
  EXPECT_TRUE(sa.contains("dataset/index.txt"));
}

TEST(Pipeline, ZeroOffsetOnlyReproducesOriginalScans) {
  SmallRun run;
  run.cfg.offsets = {0.0};
  run_pipeline(run.cfg);
  const Layout out = run.layout();
  const auto seq = io::load_sequence(io::read_manifest(run.cfg.manifest));
  const auto rows = io::read_index(out.dataset_dir() / "index.txt");
  ASSERT_EQ(rows.size(), 7u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.offset_m, 0.0);
    const auto cloud = io::read_cloud(out.dataset_dir() / (r.sample_id + ".ply"));
    EXPECT_EQ(cloud.points, io::frontal_crop(seq.scans[r.timestep]).points) << r.sample_id;
  }
  EXPECT_FALSE(fs::exists(out.synth_dir()) && !fs::is_empty(out.synth_dir()));
}

TEST(Pipeline, StageWithoutInputsNamesTheArtifact) {
  SmallRun run;
  try {
    run_stage(stages()[2], run.cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find("stage mesh: missing artifact"), std::string::npos);
  }
}

TEST(Pipeline, FailedStageLeavesPartialMarker) {
  SmallRun run;
  Trajectory t = io::read_trajectory(run.cfg.trajectory);
  t.poses.pop_back();
  io::write_trajectory(t, run.dir / "in/short.txt");
  run.cfg.trajectory = run.dir / "in/short.txt";
  try {
    run_pipeline(run.cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find("stage odometry"), std::string::npos);
  }
  EXPECT_TRUE(fs::exists(run.layout().partial_marker()));
  EXPECT_FALSE(fs::exists(run.layout().report()));
}

TEST(Labels, FileRoundTripIsExact) {
  test::TempDir dir("labels");
  std::mt19937_64 rng(4);
  std::vector<LabelRecord> records;
  for (std::size_t t = 0; t < 20; ++t) {
    LabelRecord r{t, t % 3 == 0 ? -0.0 : 0.1 * static_cast<double>(t)};
    for (auto& w : r.label.waypoints) w = Vec2(std::normal_distribution<double>(0, 10)(rng), 1.0 / 3.0);
    records.push_back(r);
  }
  write_labels(records, dir / "l.txt");
  const auto back = read_labels(dir / "l.txt");
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].timestep, records[i].timestep);
    EXPECT_EQ(back[i].offset_m, records[i].offset_m);
    EXPECT_EQ(back[i].label.waypoints, records[i].label.waypoints);
  }
  EXPECT_EQ(test::slurp(dir / "l.txt").find("-0 "), std::string::npos);
  test::spit(dir / "bad.txt", "1 0 1 2 3\n");
  EXPECT_THROW(read_labels(dir / "bad.txt"), Error);
}

TEST(Labels, NoiseStreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::size_t t = 0; t < 50; ++t) {
    for (std::size_t j = 0; j < 11; ++j) EXPECT_TRUE(seen.insert(noise_stream(t, j, 11)).second);
  }
}
