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

// Ball-pivoting surface reconstruction. A ball of radius r resting on three
// points with no other point inside defines a triangle; the ball is then
// rolled around each boundary edge of the growing mesh until it touches a new
// point. Radii are processed in ascending passes. Mesh vertices are the input
// points themselves, so vertex positions are never moved.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/core/kd_index.hpp"
#include "lidarsyn/scene/accumulate.hpp"
#include "lidarsyn/scene/normals.hpp"

namespace lidarsyn {

struct BpaConfig {
  std::vector<double> radii{0.1, 0.2, 0.4, 0.8, 1.6};  // m, strictly ascending
  double dedup_voxel = 0.05;                 // m; 0 disables deduplication
  int normal_neighbors = 16;

  void validate() const {
    if (radii.empty()) fail(ErrorCode::kInvalidInput, "at least one ball radius is required");
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
        fail(ErrorCode::kInvalidInput, "ball radii must be positive and strictly ascending");
      }
    }
    if (dedup_voxel < 0) fail(ErrorCode::kInvalidInput, "dedup voxel must be >= 0");
    if (normal_neighbors < 3) fail(ErrorCode::kInvalidInput, "normal estimation needs >= 3 neighbors");
  }
};

struct MeshStats {
  std::size_t input_points = 0;
  std::size_t vertices = 0;  // after deduplication
  std::size_t vertices_used = 0;
  std::size_t triangles = 0;
  std::size_t unreferenced = 0;
  std::vector<std::size_t> triangles_per_radius;
};

/// Keeps the first point of every occupied voxel, in input order. The kept
/// points are bit-identical copies of input points.
inline std::vector<Point3> voxel_dedup(const std::vector<Point3>& points, double voxel) {
  if (voxel <= 0) return points;
  std::unordered_map<std::uint64_t, bool> seen;
  seen.reserve(points.size());
  std::vector<Point3> out;
  for (const auto& p : points) {
    const auto ix = static_cast<std::int64_t>(std::floor(p.x() / voxel));
    const auto iy = static_cast<std::int64_t>(std::floor(p.y() / voxel));
    const auto iz = static_cast<std::int64_t>(std::floor(p.z() / voxel));
    const std::uint64_t key = (static_cast<std::uint64_t>(ix) & 0x1fffff) |
                              ((static_cast<std::uint64_t>(iy) & 0x1fffff) << 21) |
                              ((static_cast<std::uint64_t>(iz) & 0x1fffff) << 42);
    if (seen.emplace(key, true).second) out.push_back(p);
  }
  return out;
}

class BallPivoting {
 public:
  BallPivoting(std::vector<Point3> points, std::vector<Vec3> normals)
      : index_(std::move(points)), normals_(std::move(normals)) {
    const std::size_t n = index_.size();
    out_edges_.resize(n);
    front_degree_.assign(n, 0);
    used_.assign(n, false);
  }

  /// Runs one pass at `radius`: reactivates boundary edges whose ball still
  /// fits, expands the front, then seeds new patches until no seed remains.
  void run_pass(double radius) {
    radius_ = radius;
    inner_radius_ = radius * (1.0 - 1e-7);
    if (!triangles_.empty()) reactivate_boundary();
    expand_front();
    for (std::uint32_t s = 0; s < index_.size(); ++s) {
      if (used_[s]) continue;
      if (try_seed(s)) expand_front();
    }
  }

  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Point3>& points() const { return index_.points(); }
  std::size_t used_vertex_count() const { return static_cast<std::size_t>(std::count(used_.begin(), used_.end(), true)); }

 private:
  enum class EdgeStatus : std::uint8_t { kActive, kBoundary };
  struct FrontEdge {
    std::uint32_t opposite;
    Vec3 center;
    EdgeStatus status;
  };

  static std::uint64_t key(std::uint32_t a, std::uint32_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

  bool has_edge(std::uint32_t a, std::uint32_t b) const {
    const auto& out = out_edges_[a];
    return std::find(out.begin(), out.end(), b) != out.end();
  }

  const Point3& p(std::uint32_t i) const { return index_.points()[i]; }

  // Center of the radius_ ball touching a, b, c on the side of the normal of
  // the oriented triangle (a, b, c).
  std::optional<Vec3> ball_center(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    const Vec3 ca = p(a) - p(c), cb = p(b) - p(c);
    const Vec3 cross = ca.cross(cb);
    const double cross2 = cross.squaredNorm();
    if (0.5 * std::sqrt(cross2) < kDegenerateTriangleArea) return std::nullopt;
    const Vec3 cc = p(c) + (ca.squaredNorm() * cb - cb.squaredNorm() * ca).cross(cross) / (2.0 * cross2);
    const double rho2 = (cc - p(a)).squaredNorm();
    const double h2 = radius_ * radius_ - rho2;
    if (h2 < 0) return std::nullopt;
    // (b - a) x (c - a) == (a - c) x (b - c)
    return cc + std::sqrt(h2) * (cross / std::sqrt(cross2));
  }

  bool ball_empty(const Vec3& center, std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    return !index_.any_within(center, inner_radius_, [&](std::uint32_t i) { return i != a && i != b && i != c; });
  }

  bool normals_agree(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
    const Vec3 n = (p(b) - p(a)).cross(p(c) - p(a));
    return n.dot(normals_[a] + normals_[b] + normals_[c]) > 0;
  }

  void add_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c, const Vec3& center) {
    triangles_.push_back({a, b, c});
    const std::uint32_t v[3] = {a, b, c};
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t x = v[e], y = v[(e + 1) % 3], opp = v[(e + 2) % 3];
      used_[x] = true;
      out_edges_[x].push_back(y);
      if (has_edge(y, x)) {
        // The reverse edge was on the front; both sides are now covered.
        front_.erase(key(y, x));
        --front_degree_[x];
        --front_degree_[y];
      } else {
        front_[key(x, y)] = FrontEdge{opp, center, EdgeStatus::kActive};
        ++front_degree_[x];
        ++front_degree_[y];
        queue_.push_back(key(x, y));
      }
    }
  }

  void reactivate_boundary() {
    std::vector<std::uint64_t> keys;
    for (const auto& [k, e] : front_) {
      if (e.status == EdgeStatus::kBoundary) keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    for (auto k : keys) {
      auto& e = front_.at(k);
      const auto a = static_cast<std::uint32_t>(k >> 32), b = static_cast<std::uint32_t>(k & 0xffffffffu);
      const auto c = ball_center(a, b, e.opposite);
      if (c && ball_empty(*c, a, b, e.opposite)) {
        e.center = *c;
        e.status = EdgeStatus::kActive;
        queue_.push_back(k);
      }
    }
  }

  void expand_front() {
    while (!queue_.empty()) {
      const std::uint64_t k = queue_.front();
      queue_.pop_front();
      auto it = front_.find(k);
      if (it == front_.end() || it->second.status != EdgeStatus::kActive) continue;
      const auto a = static_cast<std::uint32_t>(k >> 32), b = static_cast<std::uint32_t>(k & 0xffffffffu);
      const FrontEdge edge = it->second;
      if (!pivot(a, b, edge)) front_[k].status = EdgeStatus::kBoundary;
    }
  }

  // Rolls the ball around edge a->b away from the triangle's opposite vertex
  // and creates triangle (b, a, k) for the first point k it touches.
  bool pivot(std::uint32_t a, std::uint32_t b, const FrontEdge& edge) {
    const Vec3 mid = 0.5 * (p(a) + p(b));
    const Vec3 axis = (p(b) - p(a)).normalized();
    const Vec3 v0 = edge.center - mid;
    const double rho = v0.norm();
    index_.radius_search(mid, rho + radius_, candidates_, false);

    double best_angle = std::numeric_limits<double>::infinity();
    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    Vec3 best_center;
    for (const auto& cand : candidates_) {
      const std::uint32_t k = cand.index;
      if (k == a || k == b || k == edge.opposite) continue;
      // The ball center circles the edge at distance rho; k can only be
      // touched if it lies within radius of that circle.
      const Vec3 w = p(k) - mid;
      const double along = w.dot(axis);
      const double across = (w - along * axis).norm() - rho;
      if (along * along + across * across > radius_ * radius_ * (1.0 + 1e-9)) continue;
      const auto c = ball_center(b, a, k);
      if (!c || !normals_agree(b, a, k)) continue;
      const Vec3 v1 = *c - mid;
      double angle = std::atan2(axis.dot(v0.cross(v1)), v0.dot(v1));
      if (angle < 0) angle = angle > -1e-9 ? 0.0 : angle + 2.0 * std::numbers::pi;
      if (angle < best_angle || (angle == best_angle && k < best)) {
        best_angle = angle;
        best = k;
        best_center = *c;
      }
    }
    if (best == std::numeric_limits<std::uint32_t>::max()) return false;
    if (used_[best] && front_degree_[best] == 0) return false;  // interior vertex
    if (has_edge(a, best) || has_edge(best, b)) return false;
    if (!ball_empty(best_center, a, b, best)) return false;
    add_triangle(b, a, best, best_center);
    return true;
  }

  bool try_seed(std::uint32_t s) {
    const double reach2 = 4.0 * radius_ * radius_;
    std::vector<std::uint32_t> close;
    for (const auto& n : index_.k_nearest(p(s), kSeedSearch)) {
      if (n.squared_distance > reach2) break;
      if (n.index != s && !used_[n.index]) close.push_back(n.index);
      if (close.size() >= kSeedNeighbors) break;
    }
    for (std::size_t i = 0; i < close.size(); ++i) {
      for (std::size_t j = i + 1; j < close.size(); ++j) {
        std::uint32_t u = close[i], v = close[j];
        if (!normals_agree(s, u, v)) std::swap(u, v);
        const Vec3 n = (p(u) - p(s)).cross(p(v) - p(s));
        if (n.dot(normals_[s]) <= 0 || n.dot(normals_[u]) <= 0 || n.dot(normals_[v]) <= 0) continue;
        const auto c = ball_center(s, u, v);
        if (!c || !ball_empty(*c, s, u, v)) continue;
        add_triangle(s, u, v, *c);
        return true;
      }
    }
    return false;
  }

  static constexpr std::size_t kSeedNeighbors = 16;
  static constexpr std::size_t kSeedSearch = 48;

  KdIndex index_;
  std::vector<Vec3> normals_;
  std::vector<std::vector<std::uint32_t>> out_edges_;  // directed edges a -> b of emitted triangles
  std::vector<int> front_degree_;                      // incident edges lacking a reverse
  std::vector<bool> used_;
  std::unordered_map<std::uint64_t, FrontEdge> front_;
  std::deque<std::uint64_t> queue_;
  std::vector<Triangle> triangles_;
  std::vector<Neighbor> candidates_;
  double radius_ = 0.0, inner_radius_ = 0.0;
};

/// Deduplicates (optional), estimates normals and runs ball pivoting over the
/// configured radii. `viewpoints` (sensor positions in world) orient normals
/// of wall-like surfaces. Throws kEmptyMesh if no triangle can be formed.
inline TriangleMesh reconstruct_mesh(const FusedCloud& fused, const BpaConfig& cfg,
                                     const std::vector<Point3>& viewpoints = {}, MeshStats* stats = nullptr,
                                     unsigned workers = 1) {
  cfg.validate();
  if (fused.cloud.size() < 3) fail(ErrorCode::kInvalidInput, "meshing needs at least 3 points");
  std::vector<Point3> pts = voxel_dedup(fused.cloud.points, cfg.dedup_voxel);
  std::vector<Vec3> normals;
  {
    const KdIndex index(pts);
    normals = estimate_normals(index, static_cast<std::size_t>(cfg.normal_neighbors), viewpoints, workers);
  }
  BallPivoting bpa(pts, std::move(normals));
  MeshStats local;
  for (double r : cfg.radii) {
    const std::size_t before = bpa.triangles().size();
    bpa.run_pass(r);
    local.triangles_per_radius.push_back(bpa.triangles().size() - before);
  }
  if (bpa.triangles().empty()) fail(ErrorCode::kEmptyMesh, "no seed triangle found at any ball radius");
  TriangleMesh mesh{std::move(pts), bpa.triangles()};
  local.input_points = fused.cloud.size();
  local.vertices = mesh.vertices.size();
  local.vertices_used = bpa.used_vertex_count();
  local.triangles = mesh.triangles.size();
  local.unreferenced = local.vertices - local.vertices_used;
  if (stats) *stats = local;
  return mesh;
}

}  // namespace lidarsyn
