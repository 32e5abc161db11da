// Copyright 2026 The Occlufuse Authors
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

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace occlufuse {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Variance sentinel marking a pose axis that carries no information:
/// structurally unobservable estimator axes, and measurement channels a
/// fusion step must ignore. One shared constant so covariance inflation
/// means the same thing toolkit-wide.
inline constexpr double kUnobservableVariance = 1e6;

/// Wrap an angle to (-pi, pi].
double wrap_angle(double rad);

/// 6-DoF pose: position in meters, attitude as roll/pitch/yaw in radians.
/// Attitude components are expected wrapped to (-pi, pi]; use wrapped() to
/// normalize after arithmetic.
struct Pose6 {
  Vec3 position = Vec3::Zero();
  Vec3 attitude = Vec3::Zero();  // roll, pitch, yaw

  Vec6 vector() const {
    Vec6 v;
    v << position, attitude;
    return v;
  }
  static Pose6 from_vector(const Vec6& v) {
    return Pose6{v.head<3>(), v.tail<3>()};
  }
  Pose6 wrapped() const;
  bool finite() const;
};

/// Rigid transform: x_parent = rotation * x_child + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
  RigidTransform inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }
  /// Orthonormality check: R^T R = I and det(R) = 1, both within tol.
  bool is_rotation(double tol = 1e-9) const;

  static RigidTransform identity() { return {}; }
  static RigidTransform translate(const Vec3& t) { return {Mat3::Identity(), t}; }
};

/// Rotation matrix from roll/pitch/yaw, intrinsic, applied in that order
/// about body x, y, z: R = Rx(roll) * Ry(pitch) * Rz(yaw).
Mat3 rpy_to_matrix(const Vec3& attitude);

/// Inverse of rpy_to_matrix. At |pitch| = pi/2 (within 1e-9) roll is set to 0
/// and the remaining rotation folded into yaw.
Vec3 matrix_to_rpy(const Mat3& rotation);

/// Pose as a rigid transform (object frame -> world frame).
RigidTransform pose_to_transform(const Pose6& pose);

/// Componentwise a - b with attitude components wrapped to (-pi, pi].
Vec6 pose_error(const Pose6& a, const Pose6& b);

/// Pinhole camera. Extrinsic maps world points into the camera frame
/// (x right, y down, z forward).
struct CameraModel {
  double fx = 0.0, fy = 0.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels
  int height = 0, width = 0;  // image size, pixels
  RigidTransform extrinsic;   // world -> camera

  bool valid() const {
    return fx > 0 && fy > 0 && cx > 0 && cx < width && cy > 0 && cy < height &&
           height > 0 && width > 0;
  }
  Vec3 position_world() const { return extrinsic.inverse().translation; }

  /// Camera at `eye` looking at `target`, `up` roughly opposing image y.
  static CameraModel look_at(double fx, double fy, int width, int height,
                             const Vec3& eye, const Vec3& target,
                             const Vec3& up = Vec3(0, 0, 1));
};

/// Projects a world point. Empty when the camera-frame z is <= 0 (the
/// rasterizer clips such geometry instead of projecting it).
std::optional<Vec2> project_point(const CameraModel& camera, const Vec3& p_world);

enum class ShapeKind { Sphere, Capsule, Cylinder, Box };

/// Convex solid used both for targets and occluders. Capsule and cylinder
/// axes run along local z; box dimensions are half extents.
struct ShapePrimitive {
  ShapeKind kind = ShapeKind::Sphere;
  Vec3 dims = Vec3::Zero();        // per-kind, see factories
  int tessellation_budget = 1024;  // max triangles for the mesh

  static ShapePrimitive sphere(double radius, int budget = 1024);
  /// `length` is the cylindrical section, total height = length + 2*radius.
  static ShapePrimitive capsule(double radius, double length, int budget = 1024);
  static ShapePrimitive cylinder(double radius, double length, int budget = 1024);
  static ShapePrimitive box(double hx, double hy, double hz, int budget = 1024);

  double radius() const { return dims[0]; }
  double length() const { return dims[1]; }
  Vec3 half_extents() const { return dims; }
  bool valid() const;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// Closed triangle mesh for the primitive, in its local frame. Triangle
/// count stays within the shape's tessellation budget.
TriangleMesh tessellate(const ShapePrimitive& shape);

/// True when every undirected edge is shared by exactly two triangles.
bool is_watertight(const TriangleMesh& mesh);

/// Analytic nearest point on the posed shape's surface to a world query
/// point. Defined for interior queries as well.
Vec3 nearest_surface_point(const ShapePrimitive& shape, const Pose6& pose,
                           const Vec3& query_world);

}  // namespace occlufuse
