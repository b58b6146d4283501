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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"

namespace lidarsyn {

/// Determinant threshold below which a ray is treated as parallel to a
/// triangle, and the minimum accepted hit distance along the ray.
inline constexpr double kRayDeterminantEpsilon = 1e-12;
inline constexpr double kRayMinDistance = 1e-6;
inline constexpr double kUnitTolerance = 1e-9;

struct RayHit {
  Point3 point;
  double t = 0.0;
  std::uint32_t triangle = 0;
};

/// Moller-Trumbore intersection with inclusive barycentric bounds, so a ray
/// through a shared edge or vertex hits every incident triangle and the
/// caller's (t, index) ordering picks a single winner.
inline std::optional<double> intersect_ray_triangle(const Point3& origin, const Vec3& dir,
                                                    const Point3& v0, const Vec3& e1, const Vec3& e2) {
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kRayDeterminantEpsilon) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - v0;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv;
  if (t < kRayMinDistance) return std::nullopt;
  return t;
}

/// Closest point on triangle (a, b, c) to p, by Voronoi-region case analysis.
inline Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

struct ClosestPoint {
  Point3 point;
  double distance = std::numeric_limits<double>::infinity();
  std::uint32_t triangle = 0;
};

/// Binary SAH bounding-volume hierarchy over mesh triangles. Immutable after
/// construction and safe to share across threads.
class BvhIndex {
 public:
  struct Node {
    Aabb box;
    std::uint32_t left = 0;   // first child; right child is left + 1 for inner nodes
    std::uint32_t first = 0;  // range into triangle_order() for leaves
    std::uint32_t count = 0;  // 0 marks an inner node
  };

  BvhIndex() = default;

  explicit BvhIndex(const TriangleMesh& mesh) {
    const std::size_t n = mesh.triangles.size();
    v0_.resize(n);
    e1_.resize(n);
    e2_.resize(n);
    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centroids(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& tri = mesh.triangles[i];
      for (auto v : tri) {
        if (v >= mesh.vertices.size()) fail(ErrorCode::kInvalidInput, "triangle index out of range");
      }
      const Point3& a = mesh.vertices[tri[0]];
      const Point3& b = mesh.vertices[tri[1]];
      const Point3& c = mesh.vertices[tri[2]];
      v0_[i] = a;
      e1_[i] = b - a;
      e2_[i] = c - a;
      boxes[i].extend(a);
      boxes[i].extend(b);
      boxes[i].extend(c);
      centroids[i] = (a + b + c) / 3.0;
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    if (n == 0) return;
    nodes_.reserve(2 * n);
    nodes_.push_back({});
    build(0, 0, static_cast<std::uint32_t>(n), 0, boxes, centroids);
  }

  std::size_t triangle_count() const { return v0_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& triangle_order() const { return order_; }

  /// Vertices of triangle i as stored by the index.
  std::array<Point3, 3> triangle(std::uint32_t i) const {
    return {v0_[i], Point3(v0_[i] + e1_[i]), Point3(v0_[i] + e2_[i])};
  }

  /// Smallest-t intersection with t in [kRayMinDistance, t_max]; ties on t
  /// resolve to the lowest triangle index. Throws kInvalidInput unless
  /// |direction| = 1 within 1e-9.
  std::optional<RayHit> first_hit(const Point3& origin, const Vec3& direction,
                                  double t_max = std::numeric_limits<double>::infinity()) const {
    if (!is_finite(origin) || std::abs(direction.norm() - 1.0) > kUnitTolerance) {
      fail(ErrorCode::kInvalidInput, "ray direction must be unit length");
    }
    return first_hit_unchecked(origin, direction, t_max);
  }

  std::optional<RayHit> first_hit_unchecked(const Point3& origin, const Vec3& dir, double t_max) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
    double best_t = t_max;
    std::uint32_t best_tri = std::numeric_limits<std::uint32_t>::max();

    std::array<std::uint32_t, 2 * kMaxDepth + 2> stack;
    int top = 0;
    if (!slab(nodes_[0].box, origin, dir, inv, best_t)) return std::nullopt;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (node.count > 0) {
        for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
          const std::uint32_t tri = order_[k];
          const auto t = intersect_ray_triangle(origin, dir, v0_[tri], e1_[tri], e2_[tri]);
          if (t && (*t < best_t || (*t == best_t && tri < best_tri))) {
            best_t = *t;
            best_tri = tri;
          }
        }
        continue;
      }
      const Node& l = nodes_[node.left];
      const Node& r = nodes_[node.left + 1];
      const auto tl = slab(l.box, origin, dir, inv, best_t);
      const auto tr = slab(r.box, origin, dir, inv, best_t);
      if (tl && tr) {
        // Push the farther child first so the nearer one is popped next.
        if (*tl <= *tr) {
          stack[top++] = node.left + 1;
          stack[top++] = node.left;
        } else {
          stack[top++] = node.left;
          stack[top++] = node.left + 1;
        }
      } else if (tl) {
        stack[top++] = node.left;
      } else if (tr) {
        stack[top++] = node.left + 1;
      }
    }
    if (best_tri == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
    return RayHit{origin + best_t * dir, best_t, best_tri};
  }

  /// Exact closest point on the mesh surface to p (branch and bound).
  ClosestPoint closest_point(const Point3& p) const {
    ClosestPoint best;
    if (nodes_.empty()) return best;
    double best_d2 = std::numeric_limits<double>::infinity();
    std::array<std::uint32_t, 2 * kMaxDepth + 2> stack;
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (box_distance2(node.box, p) > best_d2) continue;
      if (node.count > 0) {
        for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
          const std::uint32_t tri = order_[k];
          const Point3 c = closest_point_on_triangle(p, v0_[tri], v0_[tri] + e1_[tri], v0_[tri] + e2_[tri]);
          const double d2 = (c - p).squaredNorm();
          if (d2 < best_d2 || (d2 == best_d2 && tri < best.triangle)) {
            best_d2 = d2;
            best.point = c;
            best.triangle = tri;
          }
        }
        continue;
      }
      const double dl = box_distance2(nodes_[node.left].box, p);
      const double dr = box_distance2(nodes_[node.left + 1].box, p);
      if (dl <= dr) {
        stack[top++] = node.left + 1;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.left + 1;
      }
    }
    best.distance = std::sqrt(best_d2);
    return best;
  }

 private:
  static constexpr std::uint32_t kMaxLeafSize = 4;
  static constexpr int kBins = 16;
  static constexpr int kMaxDepth = 60;

  static double box_distance2(const Aabb& b, const Point3& p) {
    const Vec3 d = (b.lo - p).cwiseMax(p - b.hi).cwiseMax(0.0);
    return d.squaredNorm();
  }

  // Entry distance of the ray into the box if it enters before t_max.
  static std::optional<double> slab(const Aabb& b, const Point3& o, const Vec3& d, const Vec3& inv,
                                    double t_max) {
    double t0 = 0.0, t1 = t_max;
    for (int a = 0; a < 3; ++a) {
      if (d[a] == 0.0) {
        if (o[a] < b.lo[a] || o[a] > b.hi[a]) return std::nullopt;
        continue;
      }
      double near = (b.lo[a] - o[a]) * inv[a];
      double far = (b.hi[a] - o[a]) * inv[a];
      if (near > far) std::swap(near, far);
      t0 = std::max(t0, near);
      t1 = std::min(t1, far);
      if (t0 > t1) return std::nullopt;
    }
    return t0;
  }

  void build(std::uint32_t id, std::uint32_t first, std::uint32_t count, int depth, const std::vector<Aabb>& boxes,
             const std::vector<Vec3>& centroids) {
    Aabb box, cbox;
    for (std::uint32_t k = first; k < first + count; ++k) {
      box.extend(boxes[order_[k]]);
      cbox.extend(centroids[order_[k]]);
    }
    nodes_[id].box = box;
    int axis = 0;
    const Vec3 extent = cbox.hi - cbox.lo;
    extent.maxCoeff(&axis);
    if (count <= kMaxLeafSize || extent[axis] <= 0.0) {
      nodes_[id].first = first;
      nodes_[id].count = count;
      return;
    }

    // Binned SAH along the widest centroid axis.
    std::array<Aabb, kBins> bin_box;
    std::array<std::uint32_t, kBins> bin_count{};
    const double scale = kBins / extent[axis];
    auto bin_of = [&](std::uint32_t tri) {
      const int b = static_cast<int>((centroids[tri][axis] - cbox.lo[axis]) * scale);
      return std::clamp(b, 0, kBins - 1);
    };
    for (std::uint32_t k = first; k < first + count; ++k) {
      const int b = bin_of(order_[k]);
      ++bin_count[b];
      bin_box[b].extend(boxes[order_[k]]);
    }
    std::array<double, kBins - 1> left_cost{};
    Aabb acc;
    std::uint32_t acc_n = 0;
    for (int b = 0; b < kBins - 1; ++b) {
      acc.extend(bin_box[b]);
      acc_n += bin_count[b];
      left_cost[b] = acc_n == 0 ? 0.0 : acc.surface_area() * acc_n;
    }
    acc = Aabb{};
    acc_n = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_split = -1;
    for (int b = kBins - 1; b > 0; --b) {
      acc.extend(bin_box[b]);
      acc_n += bin_count[b];
      const double cost = left_cost[b - 1] + (acc_n == 0 ? 0.0 : acc.surface_area() * acc_n);
      if (acc_n > 0 && acc_n < count && cost < best_cost) {
        best_cost = cost;
        best_split = b;
      }
    }

    std::uint32_t mid;
    // Median split past the depth budget keeps the traversal stack bounded.
    if (best_split < 0 || depth >= kMaxDepth - 20) {
      mid = first + count / 2;
      std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                       [&](std::uint32_t a, std::uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });
    } else {
      auto it = std::stable_partition(order_.begin() + first, order_.begin() + first + count,
                                      [&](std::uint32_t tri) { return bin_of(tri) < best_split; });
      mid = static_cast<std::uint32_t>(it - order_.begin());
    }

    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[id].left = left;
    nodes_[id].count = 0;
    build(left, first, mid - first, depth + 1, boxes, centroids);
    build(left + 1, mid, first + count - mid, depth + 1, boxes, centroids);
  }

  std::vector<Point3> v0_;
  std::vector<Vec3> e1_, e2_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace lidarsyn
