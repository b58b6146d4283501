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

#include "lidarsyn/pipeline/pipeline.hpp"
#include "lidarsyn/testbed/evaluate.hpp"

namespace lidarsyn::pipeline {

/// Reads trajectory, mesh, labels and synthesized scans back from an output
/// directory. Synthesized scan poses are recomputed from the trajectory.
inline testbed::PipelineOutputs load_outputs(const PipelineConfig& cfg) {
  const Layout out{cfg.output_dir};
  for (const auto& p : {out.trajectory(), out.mesh(), out.labels()}) require(p);
  testbed::PipelineOutputs o;
  o.trajectory = io::read_trajectory(out.trajectory());
  o.mesh = io::read_mesh(out.mesh());
  for (const auto& r : read_labels(out.labels())) {
    if (r.timestep >= o.trajectory.size()) {
      fail(ErrorCode::kInvalidInput, fmt::format("label for timestep {} beyond trajectory", r.timestep));
    }
    o.labels.push_back({r.timestep, r.offset_m, r.label});
    if (r.offset_m == 0.0) continue;
    const fs::path p = out.synth_scan(cfg.sequence_id, r.timestep, r.offset_m);
    require(p);
    o.scans.push_back({r.timestep, r.offset_m, lateral_offset_pose(o.trajectory[r.timestep], r.offset_m),
                       io::read_cloud(p)});
  }
  return o;
}

}  // namespace lidarsyn::pipeline
