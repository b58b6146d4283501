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

// Core geometric types. Coordinates follow the left-handed vehicle convention:
// x forwards, y to the right, z up, all in meters.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lidarsyn/core/error.hpp"

namespace lidarsyn {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;

inline bool is_finite(const Vec3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

enum class Direction { kForward, kInverse };

/// Rigid transform p' = R p + t. Poses stored in a Trajectory are
/// world-to-sensor: they map global coordinates into the sensor frame.
class PoseSE3 {
 public:
  PoseSE3() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws kInvalidInput unless `rotation` is orthonormal with det +1
  /// (within 1e-9) and all entries are finite.
  PoseSE3(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {
    validate();
  }

  static PoseSE3 identity() { return PoseSE3(); }

  static PoseSE3 from_translation(const Vec3& t) { return PoseSE3(Mat3::Identity(), t); }

  /// Rotation about +z by `angle` radians followed by translation.
  static PoseSE3 from_yaw(double angle, const Vec3& t = Vec3::Zero()) {
    return PoseSE3(Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(), t);
  }

  /// Skips validation; for values produced by closed-form fits that are
  /// orthonormal up to rounding.
  static PoseSE3 unchecked(const Mat3& rotation, const Vec3& translation) {
    PoseSE3 pose;
    pose.rotation_ = rotation;
    pose.translation_ = translation;
    return pose;
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_inverse(const Vec3& p) const { return rotation_.transpose() * (p - translation_); }
  Vec3 rotate(const Vec3& v) const { return rotation_ * v; }

  PoseSE3 inverse() const {
    const Mat3 rt = rotation_.transpose();
    return unchecked(rt, -(rt * translation_));
  }

  /// (this * other)(p) == this(other(p)).
  PoseSE3 operator*(const PoseSE3& other) const {
    return unchecked(rotation_ * other.rotation_, rotation_ * other.translation_ + translation_);
  }

  /// For a world-to-sensor pose: the sensor origin expressed in world.
  Vec3 origin_in_world() const { return -(rotation_.transpose() * translation_); }

  bool is_valid(double tol = 1e-9) const {
    for (int r = 0; r < 3; ++r) {
      if (!std::isfinite(translation_[r])) return false;
      for (int c = 0; c < 3; ++c) {
        if (!std::isfinite(rotation_(r, c))) return false;
      }
    }
    const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation_.determinant() - 1.0) <= tol;
  }

  void validate() const {
    if (!is_valid()) fail(ErrorCode::kInvalidInput, "pose is not a finite rigid transform");
  }

  /// Rotation angle of the relative rotation between two poses, radians.
  static double rotation_angle_between(const PoseSE3& a, const PoseSE3& b) {
    const Mat3 rel = a.rotation_.transpose() * b.rotation_;
    const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
  }

  bool operator==(const PoseSE3& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

enum class Frame { kSensor, kWorld };

/// Ordered point set. Points are finite; check_finite() enforces this at
/// trust boundaries (file I/O, public constructors of derived data).
struct PointCloud {
  std::vector<Point3> points;
  Frame frame = Frame::kSensor;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void check_finite() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!is_finite(points[i])) {
        fail(ErrorCode::kInvalidInput, "non-finite coordinate at point " + std::to_string(i));
      }
    }
  }
};

using Triangle = std::array<std::uint32_t, 3>;

inline constexpr double kDegenerateTriangleArea = 1e-12;

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<Triangle> triangles;

  double triangle_area(std::size_t i) const {
    const auto& t = triangles[i];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }

  /// Index range, finiteness and non-degeneracy.
  void validate() const {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (!is_finite(vertices[i])) {
        fail(ErrorCode::kInvalidInput, "non-finite mesh vertex " + std::to_string(i));
      }
    }
    for (std::size_t i = 0; i < triangles.size(); ++i) {
      for (auto v : triangles[i]) {
        if (v >= vertices.size()) {
          fail(ErrorCode::kInvalidInput, "triangle " + std::to_string(i) + " references vertex " +
                                             std::to_string(v) + " of " +
                                             std::to_string(vertices.size()));
        }
      }
      if (triangle_area(i) < kDegenerateTriangleArea) {
        fail(ErrorCode::kInvalidInput, "degenerate triangle " + std::to_string(i));
      }
    }
  }
};

/// Applies `pose` (forward: R p + t) or its inverse (R^T (p - t)) to every
/// point. Length and order are preserved.
inline PointCloud transform_cloud(const PointCloud& cloud, const PoseSE3& pose, Direction direction) {
  pose.validate();
  PointCloud out;
  out.frame = cloud.frame;
  out.points.resize(cloud.points.size());
  if (direction == Direction::kForward) {
    for (std::size_t i = 0; i < cloud.points.size(); ++i) out.points[i] = pose.apply(cloud.points[i]);
  } else {
    for (std::size_t i = 0; i < cloud.points.size(); ++i) out.points[i] = pose.apply_inverse(cloud.points[i]);
  }
  return out;
}

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Aabb& b) const {
    return (lo.array() <= b.lo.array()).all() && (hi.array() >= b.hi.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double surface_area() const {
    const Vec3 d = (hi - lo).cwiseMax(0.0);
    return 2.0 * (d.x() * d.y() + d.y() * d.z() + d.z() * d.x());
  }
};

}  // namespace lidarsyn
