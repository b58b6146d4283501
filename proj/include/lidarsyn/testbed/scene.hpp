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

// Procedural road scenes with exact geometry. Every surface is a planar
// quadrilateral (curved roads are built from chords of fixed arc length), so
// point-to-surface distances have closed forms and the triangulated mesh is
// exactly the union of the quads.
//
// Frames: the world frame is the sensor frame at pose 0. The sensor rides
// `sensor_height` above the road, so the road surface lies at z = -height.
// Lateral coordinate l is measured to the right of the ego lane center.

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lidarsyn/core/counter_rng.hpp"
#include "lidarsyn/core/error.hpp"
#include "lidarsyn/core/geometry.hpp"
#include "lidarsyn/odometry/trajectory.hpp"

namespace lidarsyn::testbed {

enum class SceneKind { kStraight, kArc, kSCurve };

inline SceneKind parse_scene_kind(const std::string& s) {
  if (s == "straight") return SceneKind::kStraight;
  if (s == "arc") return SceneKind::kArc;
  if (s == "s-curve") return SceneKind::kSCurve;
  fail(ErrorCode::kInvalidInput, "unknown scene kind '" + s + "' (straight|arc|s-curve)");
}

inline std::string to_string(SceneKind k) {
  switch (k) {
    case SceneKind::kStraight: return "straight";
    case SceneKind::kArc: return "arc";
    case SceneKind::kSCurve: return "s-curve";
  }
  return "straight";
}

enum class SurfaceTag : std::uint8_t { kRoad, kCurb, kSidewalk, kVerge, kBarrier, kPost };

struct SceneParams {
  SceneKind kind = SceneKind::kStraight;
  double length = 49.0;       // m of trajectory
  double lane_width = 3.5;    // m
  std::uint64_t seed = 0;
  double radius = 50.0;       // m, arc and s-curve turning radius
  double pose_spacing = 1.0;  // m between consecutive poses
  double frequency_hz = 10.0;
  double sensor_height = 2.0;
  double curb_height = 0.15;
  double sidewalk_width = 2.5;
  double barrier_setback = 2.5;  // barrier distance from the curb
  double barrier_height = 1.0;
  double verge_width = 15.0;
  double post_width = 0.3;
  double post_height = 3.0;
  double post_spacing_min = 6.0;  // posts are spaced uniformly in [min, max]
  double post_spacing_max = 15.0;
  double margin = 45.0;          // scene extends this far beyond both trajectory ends
  double segment_length = 1.0;   // chord length for curved strips

  void validate() const {
    for (double v : {length, lane_width, radius, pose_spacing, frequency_hz, sensor_height, curb_height,
                     sidewalk_width, barrier_setback, barrier_height, verge_width, post_width, post_height,
                     post_spacing_min, margin, segment_length}) {
      if (!(v > 0) || !std::isfinite(v)) fail(ErrorCode::kInvalidInput, "scene dimensions must be positive");
    }
    if (!(post_spacing_max >= post_spacing_min)) fail(ErrorCode::kInvalidInput, "post spacing range is empty");
    if (barrier_setback > sidewalk_width + verge_width) {
      fail(ErrorCode::kInvalidInput, "barrier lies outside the scene");
    }
  }
};

/// Planar convex quadrilateral with corners in order around its boundary.
struct Quad {
  std::array<Point3, 4> corners;
  SurfaceTag tag = SurfaceTag::kRoad;

  Vec3 normal() const { return (corners[2] - corners[0]).cross(corners[3] - corners[1]).normalized(); }

  /// Exact Euclidean distance from p to the quad.
  double distance(const Point3& p) const {
    const Vec3 n = normal();
    const double h = n.dot(p - corners[0]);
    const Point3 q = p - h * n;
    bool inside = true;
    for (int e = 0; e < 4; ++e) {
      const Vec3 edge = corners[(e + 1) % 4] - corners[e];
      if (n.dot(edge.cross(q - corners[e])) < 0) {
        inside = false;
        break;
      }
    }
    if (inside) return std::abs(h);
    double best = std::numeric_limits<double>::infinity();
    for (int e = 0; e < 4; ++e) {
      const Point3& a = corners[e];
      const Vec3 ab = corners[(e + 1) % 4] - a;
      const double t = std::clamp(ab.dot(p - a) / ab.squaredNorm(), 0.0, 1.0);
      best = std::min(best, (a + t * ab - p).norm());
    }
    return best;
  }
};

struct SyntheticScene {
  SceneParams params;
  std::vector<Quad> quads;
  TriangleMesh mesh;                      // two triangles per quad, in quad order
  std::vector<SurfaceTag> triangle_tags;  // parallel to mesh.triangles
  Trajectory ground_truth;

  double road_left() const { return -1.5 * params.lane_width; }
  double road_right() const { return 0.5 * params.lane_width; }
  double road_z() const { return -params.sensor_height; }

  /// Minimum distance to any analytic surface (brute force over quads).
  double analytic_distance(const Point3& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : quads) best = std::min(best, q.distance(p));
    return best;
  }
};

/// Centerline with piecewise-constant curvature and closed-form position.
class Centerline {
 public:
  Centerline(SceneKind kind, double length, double radius) : kind_(kind), length_(length), radius_(radius) {}

  double heading(double s) const {
    switch (kind_) {
      case SceneKind::kStraight: return 0.0;
      case SceneKind::kArc: return s / radius_;
      case SceneKind::kSCurve: {
        const double half = 0.5 * length_;
        return s <= half ? s / radius_ : (length_ - s) / radius_;
      }
    }
    return 0.0;
  }

  Vec2 position(double s) const {
    switch (kind_) {
      case SceneKind::kStraight: return {s, 0.0};
      case SceneKind::kArc: return on_arc({0.0, 0.0}, 0.0, 1.0 / radius_, s);
      case SceneKind::kSCurve: {
        const double half = 0.5 * length_;
        if (s <= half) return on_arc({0.0, 0.0}, 0.0, 1.0 / radius_, s);
        const Vec2 mid = on_arc({0.0, 0.0}, 0.0, 1.0 / radius_, half);
        return on_arc(mid, half / radius_, -1.0 / radius_, s - half);
      }
    }
    return {s, 0.0};
  }

  /// Unit vector to the right of the direction of travel.
  Vec2 right(double s) const {
    const double h = heading(s);
    return {-std::sin(h), std::cos(h)};
  }

  Point3 at(double s, double lateral, double z) const {
    const Vec2 c = position(s) + lateral * right(s);
    return {c.x(), c.y(), z};
  }

  /// Station and lateral offset (s, l) of a planar point, the inverse of at().
  Vec2 project(const Vec2& q) const {
    switch (kind_) {
      case SceneKind::kStraight: return q;
      case SceneKind::kArc: return project_arc(q, {0.0, 0.0}, 0.0, 0.0, 1.0 / radius_);
      case SceneKind::kSCurve: {
        const double half = 0.5 * length_;
        const Vec2 a = project_arc(q, {0.0, 0.0}, 0.0, 0.0, 1.0 / radius_);
        const Vec2 b = project_arc(q, position(half), half, half / radius_, -1.0 / radius_);
        const bool a_ok = a.x() <= half, b_ok = b.x() > half;
        if (a_ok != b_ok) return a_ok ? a : b;
        return std::abs(a.y()) <= std::abs(b.y()) ? a : b;
      }
    }
    return q;
  }

 private:
  // Arc through `start` at station s0 with heading h0 and signed curvature k.
  static Vec2 project_arc(const Vec2& q, const Vec2& start, double s0, double h0, double k) {
    const Vec2 center = start + Vec2(-std::sin(h0), std::cos(h0)) / k;
    const Vec2 v = q - center;
    const double r = 1.0 / std::abs(k);
    const double h = k > 0 ? std::atan2(v.x(), -v.y()) : std::atan2(-v.x(), v.y());
    const double l = k > 0 ? r - v.norm() : v.norm() - r;
    return {s0 + (h - h0) / k, l};
  }

  static Vec2 on_arc(const Vec2& start, double heading0, double curvature, double ds) {
    const double h1 = heading0 + curvature * ds;
    return start + Vec2(std::sin(h1) - std::sin(heading0), std::cos(heading0) - std::cos(h1)) / curvature;
  }

  SceneKind kind_;
  double length_, radius_;
};

namespace detail {

// Breakpoints in s covering [lo, hi]: one segment for straight scenes, chords
// of segment_length otherwise.
inline std::vector<double> stations(const SceneParams& p, double lo, double hi) {
  std::vector<double> s{lo};
  if (p.kind != SceneKind::kStraight) {
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / p.segment_length)));
    for (int i = 1; i < n; ++i) s.push_back(lo + (hi - lo) * i / n);
  }
  s.push_back(hi);
  return s;
}

inline void add_horizontal_strip(std::vector<Quad>& out, const Centerline& c, const std::vector<double>& st,
                                 double l0, double l1, double z, SurfaceTag tag) {
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    // Counter-clockwise seen from above so the normal points to +z.
    out.push_back({{c.at(st[i], l0, z), c.at(st[i + 1], l0, z), c.at(st[i + 1], l1, z), c.at(st[i], l1, z)}, tag});
  }
}

inline void add_vertical_strip(std::vector<Quad>& out, const Centerline& c, const std::vector<double>& st, double l,
                               double z0, double z1, SurfaceTag tag) {
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    out.push_back({{c.at(st[i], l, z0), c.at(st[i + 1], l, z0), c.at(st[i + 1], l, z1), c.at(st[i], l, z1)}, tag});
  }
}

// Closed-top box centred at station s and lateral offset l, aligned with the
// centerline heading there.
inline void add_box(std::vector<Quad>& out, const Centerline& c, double s, double l, double half_len,
                    double half_depth, double z0, double z1, SurfaceTag tag) {
  const Vec2 base = c.position(s) + l * c.right(s);
  const double h = c.heading(s);
  const Vec2 fwd(std::cos(h), std::sin(h)), rgt(-std::sin(h), std::cos(h));
  std::array<Vec2, 4> xy{base - half_len * fwd - half_depth * rgt, base + half_len * fwd - half_depth * rgt,
                         base + half_len * fwd + half_depth * rgt, base - half_len * fwd + half_depth * rgt};
  auto p3 = [](const Vec2& v, double z) { return Point3(v.x(), v.y(), z); };
  for (int e = 0; e < 4; ++e) {
    const Vec2& a = xy[e];
    const Vec2& b = xy[(e + 1) % 4];
    out.push_back({{p3(a, z0), p3(b, z0), p3(b, z1), p3(a, z1)}, tag});
  }
  out.push_back({{p3(xy[0], z1), p3(xy[1], z1), p3(xy[2], z1), p3(xy[3], z1)}, tag});
}

}  // namespace detail

inline Trajectory ground_truth_trajectory(const SceneParams& p) {
  const Centerline line(p.kind, p.length, p.radius);
  const int n = static_cast<int>(std::floor(p.length / p.pose_spacing + 1e-9)) + 1;
  Trajectory traj;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      traj.poses.push_back(PoseSE3::identity());
      continue;
    }
    const double s = i * p.pose_spacing;
    const Vec2 c = line.position(s);
    // Sensor-to-world is a yaw about z at the centerline point; store its inverse.
    const PoseSE3 sensor_to_world = PoseSE3::from_yaw(line.heading(s), Vec3(c.x(), c.y(), 0.0));
    traj.poses.push_back(sensor_to_world.inverse());
  }
  return traj;
}

/// Builds the road, curbs, sidewalks, verges, segmented barriers and posts.
/// Barrier segment lengths, gaps and post spacing are drawn from `seed`.
inline SyntheticScene generate_scene(const SceneParams& p) {
  p.validate();
  SyntheticScene scene;
  scene.params = p;
  const Centerline line(p.kind, p.length, p.radius);
  const double s_lo = -p.margin, s_hi = p.length + p.margin;
  const auto st = detail::stations(p, s_lo, s_hi);
  const double z_road = -p.sensor_height;
  const double z_walk = z_road + p.curb_height;
  const double l_right = 0.5 * p.lane_width, l_left = -1.5 * p.lane_width;
  auto& q = scene.quads;

  detail::add_horizontal_strip(q, line, st, l_left, l_right, z_road, SurfaceTag::kRoad);
  detail::add_vertical_strip(q, line, st, l_right, z_road, z_walk, SurfaceTag::kCurb);
  detail::add_vertical_strip(q, line, st, l_left, z_road, z_walk, SurfaceTag::kCurb);
  detail::add_horizontal_strip(q, line, st, l_right, l_right + p.sidewalk_width, z_walk, SurfaceTag::kSidewalk);
  detail::add_horizontal_strip(q, line, st, l_left - p.sidewalk_width, l_left, z_walk, SurfaceTag::kSidewalk);
  detail::add_horizontal_strip(q, line, st, l_right + p.sidewalk_width, l_right + p.sidewalk_width + p.verge_width,
                               z_walk, SurfaceTag::kVerge);
  detail::add_horizontal_strip(q, line, st, l_left - p.sidewalk_width - p.verge_width, l_left - p.sidewalk_width,
                               z_walk, SurfaceTag::kVerge);

  // Barrier panels with random lengths and gaps on both sides, then posts.
  for (int side = 0; side < 2; ++side) {
    const CounterRng rng(p.seed, 2 * side + 1);
    std::uint64_t draw = 0;
    const double l = side == 0 ? l_right + p.barrier_setback : l_left - p.barrier_setback;
    double s = s_lo + 3.0 * rng.uniform(draw++);
    while (s < s_hi) {
      const double panel = 4.0 + 6.0 * rng.uniform(draw++);
      const double end = std::min(s + panel, s_hi);
      detail::add_vertical_strip(q, line, detail::stations(p, s, end), l, z_walk, z_walk + p.barrier_height,
                                 SurfaceTag::kBarrier);
      s = end + 1.5 + 2.5 * rng.uniform(draw++);
    }
    const CounterRng post_rng(p.seed, 2 * side + 2);
    draw = 0;
    const double post_l = side == 0 ? l_right + 0.6 : l_left - 0.6;
    const double spread = p.post_spacing_max - p.post_spacing_min;
    s = s_lo + p.post_spacing_min * post_rng.uniform(draw++);
    while (s < s_hi) {
      detail::add_box(q, line, s, post_l, 0.5 * p.post_width, 0.5 * p.post_width, z_walk, z_walk + p.post_height,
                      SurfaceTag::kPost);
      s += p.post_spacing_min + spread * post_rng.uniform(draw++);
    }
  }

  for (const auto& quad : q) {
    const auto base = static_cast<std::uint32_t>(scene.mesh.vertices.size());
    for (const auto& c : quad.corners) scene.mesh.vertices.push_back(c);
    scene.mesh.triangles.push_back({base, base + 1, base + 2});
    scene.mesh.triangles.push_back({base, base + 2, base + 3});
    scene.triangle_tags.push_back(quad.tag);
    scene.triangle_tags.push_back(quad.tag);
  }
  scene.ground_truth = ground_truth_trajectory(p);
  return scene;
}

}  // namespace lidarsyn::testbed
