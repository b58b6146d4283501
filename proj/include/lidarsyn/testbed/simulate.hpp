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

#include <vector>

#include "lidarsyn/core/bvh_index.hpp"
#include "lidarsyn/io/sequence.hpp"
#include "lidarsyn/synthesis/beam_model.hpp"
#include "lidarsyn/synthesis/noise.hpp"
#include "lidarsyn/synthesis/synthesize.hpp"
#include "lidarsyn/testbed/scene.hpp"

namespace lidarsyn::testbed {

/// One scan per ground-truth pose, cast against the scene mesh with the same
/// caster used for view synthesis, then passed through the noise model with
/// the timestep as the noise stream.
inline io::ScanSequence simulate_sequence(const SyntheticScene& scene, const BeamModel& model,
                                          const NoiseConfig& noise, unsigned workers = 1) {
  model.validate();
  noise.validate();
  const BvhIndex bvh(scene.mesh);
  const auto dirs = build_directions(model);
  io::ScanSequence seq;
  seq.frequency_hz = scene.params.frequency_hz;
  seq.scans.resize(scene.ground_truth.size());
  parallel_for(scene.ground_truth.size(), workers, [&](std::size_t i) {
    seq.scans[i] = apply_noise(synthesize_scan(bvh, scene.ground_truth[i], model, dirs), noise, i);
  });
  return seq;
}

}  // namespace lidarsyn::testbed
