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

#include <Eigen/SVD>
#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/core/kd_index.hpp"
#include "lidarsyn/core/parallel.hpp"
#include "lidarsyn/io/sequence.hpp"
#include "lidarsyn/odometry/trajectory.hpp"

namespace lidarsyn {

struct IcpConfig {
  int max_iterations = 50;
  double convergence_threshold = 1e-5;       // m, change in residual between iterations
  double max_correspondence_distance = 1.0;  // m, pairs beyond this are trimmed
  double voxel_size = 0.25;                  // m

  void validate() const {
    if (max_iterations < 1 || !(convergence_threshold > 0) || !(max_correspondence_distance > 0) ||
        !(voxel_size > 0)) {
      fail(ErrorCode::kInvalidInput, "ICP parameters must be positive and max_iterations >= 1");
    }
  }
};

struct IcpResult {
  PoseSE3 pose;           // maps source-frame points into the target frame
  double residual = 0.0;  // m, see residual definition below
  int iterations = 0;
  std::vector<double> residual_history;  // one entry per evaluated pose, initial guess first
};

/// Centroid of the points falling in each voxel of edge `voxel_size`, emitted
/// in order of each voxel's first point.
inline std::vector<Point3> voxel_downsample(const std::vector<Point3>& points, double voxel_size) {
  struct Cell {
    Vec3 sum = Vec3::Zero();
    std::uint32_t count = 0;
  };
  std::unordered_map<std::uint64_t, std::uint32_t> slot;
  slot.reserve(points.size());
  std::vector<Cell> cells;
  for (const auto& p : points) {
    const auto ix = static_cast<std::int64_t>(std::floor(p.x() / voxel_size));
    const auto iy = static_cast<std::int64_t>(std::floor(p.y() / voxel_size));
    const auto iz = static_cast<std::int64_t>(std::floor(p.z() / voxel_size));
    const std::uint64_t key = (static_cast<std::uint64_t>(ix) & 0x1fffff) |
                              ((static_cast<std::uint64_t>(iy) & 0x1fffff) << 21) |
                              ((static_cast<std::uint64_t>(iz) & 0x1fffff) << 42);
    auto [it, inserted] = slot.try_emplace(key, static_cast<std::uint32_t>(cells.size()));
    if (inserted) cells.emplace_back();
    cells[it->second].sum += p;
    ++cells[it->second].count;
  }
  std::vector<Point3> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.sum / c.count);
  return out;
}

/// Least-squares rigid transform mapping src[i] onto dst[i] (Kabsch).
inline PoseSE3 fit_rigid(const std::vector<Point3>& src, const std::vector<Point3>& dst) {
  const std::size_t n = src.size();
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(n);
  cd /= static_cast<double>(n);
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 fix = Mat3::Identity();
  fix(2, 2) = (v * u.transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Mat3 r = v * fix * u.transpose();
  return PoseSE3::unchecked(r, cd - r * cs);
}

namespace detail {

struct Matches {
  std::vector<Point3> src, dst;
  double residual = 0.0;
};

// Residual: sqrt of the mean over all source points of min(d^2, tau^2), where
// d is the nearest-neighbor distance and tau the correspondence cutoff. This
// truncated objective cannot increase across ICP iterations.
inline Matches match(const std::vector<Point3>& source, const KdIndex& target, const PoseSE3& pose, double cutoff,
                     unsigned workers) {
  const double cutoff2 = cutoff * cutoff;
  std::vector<Neighbor> nn(source.size());
  parallel_for(source.size(), workers, [&](std::size_t i) { nn[i] = target.nearest(pose.apply(source[i])); });
  Matches m;
  double sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (nn[i].squared_distance <= cutoff2) {
      sum += nn[i].squared_distance;
      m.src.push_back(source[i]);
      m.dst.push_back(target.points()[nn[i].index]);
    } else {
      sum += cutoff2;
    }
  }
  m.residual = std::sqrt(sum / static_cast<double>(source.size()));
  return m;
}

inline IcpResult icp_downsampled(const std::vector<Point3>& source, const KdIndex& target, const PoseSE3& initial,
                                 const IcpConfig& cfg, unsigned workers) {
  if (source.empty() || target.size() == 0) fail(ErrorCode::kEmptyInput, "ICP input cloud is empty");
  IcpResult result;
  result.pose = initial;
  Matches m = match(source, target, initial, cfg.max_correspondence_distance, workers);
  result.residual = m.residual;
  result.residual_history.push_back(m.residual);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (m.src.size() < 3) {
      fail(ErrorCode::kDegenerateGeometry,
           fmt::format("only {} correspondences within {} m", m.src.size(), cfg.max_correspondence_distance));
    }
    const PoseSE3 pose = fit_rigid(m.src, m.dst);
    Matches next = match(source, target, pose, cfg.max_correspondence_distance, workers);
    const double change = result.residual - next.residual;
    result.pose = pose;
    result.residual = next.residual;
    result.residual_history.push_back(next.residual);
    result.iterations = it + 1;
    m = std::move(next);
    if (change < cfg.convergence_threshold) break;
  }
  return result;
}

}  // namespace detail

/// Point-to-point ICP on voxel-downsampled copies of both clouds. The
/// returned pose maps source points onto the target.
inline IcpResult icp_align(const PointCloud& source, const PointCloud& target, const PoseSE3& initial,
                           const IcpConfig& cfg, unsigned workers = 1) {
  cfg.validate();
  initial.validate();
  const auto src = voxel_downsample(source.points, cfg.voxel_size);
  const KdIndex tgt(voxel_downsample(target.points, cfg.voxel_size));
  return detail::icp_downsampled(src, tgt, initial, cfg, workers);
}

/// Chains pairwise ICP between consecutive scans. Pose 0 is the identity;
/// scan i is registered onto scan i-1 starting from the previous relative
/// motion (constant-velocity prior).
inline Trajectory estimate_trajectory(const io::ScanSequence& seq, const IcpConfig& cfg, unsigned workers = 1,
                                      std::vector<IcpResult>* pair_results = nullptr) {
  cfg.validate();
  if (seq.size() < 2) fail(ErrorCode::kInvalidInput, "trajectory estimation needs at least two scans");
  Trajectory traj;
  traj.poses.reserve(seq.size());
  traj.poses.push_back(PoseSE3::identity());

  std::vector<Point3> prev = voxel_downsample(seq.scans[0].points, cfg.voxel_size);
  PoseSE3 motion = PoseSE3::identity();  // frame i -> frame i-1
  for (std::size_t i = 1; i < seq.size(); ++i) {
    std::vector<Point3> cur = voxel_downsample(seq.scans[i].points, cfg.voxel_size);
    const KdIndex target(std::move(prev));
    IcpResult r;
    try {
      r = detail::icp_downsampled(cur, target, motion, cfg, workers);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("aligning scan {} onto scan {}: {}", i, i - 1, e.message()));
    }
    motion = r.pose;
    traj.poses.push_back(motion.inverse() * traj.poses.back());
    if (pair_results) pair_results->push_back(std::move(r));
    prev = std::move(cur);
  }
  return traj;
}

}  // namespace lidarsyn
