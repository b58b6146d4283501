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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/core/kd_index.hpp"
#include "lidarsyn/core/parallel.hpp"

namespace lidarsyn {

/// Normals with |n_z| at or above this are treated as ground-like and
/// oriented to +z; steeper surfaces face the nearest sensor position.
inline constexpr double kUpwardNormalThreshold = 0.3;

/// PCA normals over the k nearest neighbors (point included). Ground-like
/// normals point to +z; wall-like normals point toward the closest entry of
/// `viewpoints`, or toward the centroid of `viewpoints` when that closest
/// entry lies in the plane. With no viewpoints walls fall back to +x.
inline std::vector<Vec3> estimate_normals(const KdIndex& index, std::size_t k, const std::vector<Point3>& viewpoints,
                                          unsigned workers = 1) {
  const auto& pts = index.points();
  std::vector<Vec3> normals(pts.size(), Vec3::UnitZ());
  Point3 centroid = Point3::Zero();
  for (const auto& v : viewpoints) centroid += v;
  if (!viewpoints.empty()) centroid /= static_cast<double>(viewpoints.size());
  const KdIndex view_index(viewpoints);

  parallel_for(pts.size(), workers, [&](std::size_t i) {
    const auto nbrs = index.k_nearest(pts[i], k);
    if (nbrs.size() < 3) return;
    Vec3 mean = Vec3::Zero();
    for (const auto& n : nbrs) mean += pts[n.index];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& n : nbrs) {
      const Vec3 d = pts[n.index] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig;
    eig.computeDirect(cov);
    Vec3 n = eig.eigenvectors().col(0).normalized();
    if (!is_finite(n)) return;
    if (std::abs(n.z()) >= kUpwardNormalThreshold) {
      if (n.z() < 0) n = -n;
    } else if (!viewpoints.empty()) {
      const Point3& view = viewpoints[view_index.nearest(pts[i]).index];
      double side = n.dot(view - pts[i]);
      if (std::abs(side) < 1e-6) side = n.dot(centroid - pts[i]);
      if (side < 0) n = -n;
    } else if (n.x() < 0) {
      n = -n;
    }
    normals[i] = n;
  });
  return normals;
}

}  // namespace lidarsyn
