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
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"

namespace lidarsyn {

struct Neighbor {
  std::uint32_t index = 0;
  double squared_distance = 0.0;

  bool operator<(const Neighbor& o) const {
    return squared_distance < o.squared_distance ||
           (squared_distance == o.squared_distance && index < o.index);
  }
};

/// Balanced kd-tree over a snapshot of points. Immutable after construction;
/// queries are const and safe to run concurrently. All query results are
/// exact and ties on distance resolve to the lowest point index.
class KdIndex {
 public:
  KdIndex() = default;

  explicit KdIndex(std::vector<Point3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 1);
      build(0, static_cast<std::uint32_t>(points_.size()));
    }
  }

  explicit KdIndex(const PointCloud& cloud) : KdIndex(cloud.points) {}

  std::size_t size() const { return points_.size(); }
  const std::vector<Point3>& points() const { return points_; }

  /// Throws kEmptyInput for an empty index.
  Neighbor nearest(const Point3& query) const {
    if (points_.empty()) fail(ErrorCode::kEmptyInput, "nearest-neighbor query on empty cloud");
    Neighbor best{std::numeric_limits<std::uint32_t>::max(), std::numeric_limits<double>::infinity()};
    nearest_rec(0, query, best);
    return best;
  }

  /// The k nearest points sorted by (distance, index).
  std::vector<Neighbor> k_nearest(const Point3& query, std::size_t k) const {
    std::vector<Neighbor> heap;
    if (points_.empty() || k == 0) return heap;
    heap.reserve(k + 1);
    knn_rec(0, query, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

  /// All points with squared distance <= radius^2, sorted by (distance, index).
  std::vector<Neighbor> radius_search(const Point3& query, double radius) const {
    std::vector<Neighbor> out;
    radius_search(query, radius, out);
    return out;
  }

  /// True if some point within `radius` of `query` satisfies `accept(index)`.
  /// Stops at the first such point.
  template <class Accept>
  bool any_within(const Point3& query, double radius, Accept&& accept) const {
    if (points_.empty()) return false;
    return any_rec(0, query, radius * radius, accept);
  }

  void radius_search(const Point3& query, double radius, std::vector<Neighbor>& out,
                     bool sorted = true) const {
    out.clear();
    if (points_.empty()) return;
    radius_rec(0, query, radius * radius, out);
    if (sorted) std::sort(out.begin(), out.end());
  }

 private:
  static constexpr std::uint32_t kLeafSize = 8;
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_
    std::uint32_t left = kNone, right = kNone;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    Aabb box;
    for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
    int axis = 0;
    (box.hi - box.lo).maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    Node& node = nodes_[id];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  // Points in the left child have coordinate <= split, points in the right
  // child >= split. Pruning uses non-strict comparisons so that equal-distance
  // candidates on both sides are visited and the index tie-break stays exact.
  void nearest_rec(std::uint32_t id, const Point3& q, Neighbor& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
        if (cand < best) best = cand;
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::uint32_t near = diff <= 0 ? node.left : node.right;
    const std::uint32_t far = diff <= 0 ? node.right : node.left;
    nearest_rec(near, q, best);
    if (diff * diff <= best.squared_distance) nearest_rec(far, q, best);
  }

  void knn_rec(std::uint32_t id, const Point3& q, std::size_t k, std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::uint32_t near = diff <= 0 ? node.left : node.right;
    const std::uint32_t far = diff <= 0 ? node.right : node.left;
    knn_rec(near, q, k, heap);
    if (heap.size() < k || diff * diff <= heap.front().squared_distance) knn_rec(far, q, k, heap);
  }

  template <class Accept>
  bool any_rec(std::uint32_t id, const Point3& q, double r2, Accept& accept) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        if ((points_[idx] - q).squaredNorm() <= r2 && accept(idx)) return true;
      }
      return false;
    }
    const double diff = q[node.axis] - node.split;
    const std::uint32_t near = diff <= 0 ? node.left : node.right;
    const std::uint32_t far = diff <= 0 ? node.right : node.left;
    if (any_rec(near, q, r2, accept)) return true;
    return diff * diff <= r2 && any_rec(far, q, r2, accept);
  }

  void radius_rec(std::uint32_t id, const Point3& q, double r2, std::vector<Neighbor>& out) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const double d2 = (points_[idx] - q).squaredNorm();
        if (d2 <= r2) out.push_back({idx, d2});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    if (diff <= 0 || diff * diff <= r2) radius_rec(node.left, q, r2, out);
    if (diff >= 0 || diff * diff <= r2) radius_rec(node.right, q, r2, out);
  }

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace lidarsyn
