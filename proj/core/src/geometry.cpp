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

#include "occlufuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace occlufuse {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_angle(double rad) {
  double r = std::fmod(rad + kPi, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r - kPi;
}

Pose6 Pose6::wrapped() const {
  Pose6 p = *this;
  for (int i = 0; i < 3; ++i) p.attitude[i] = wrap_angle(p.attitude[i]);
  return p;
}

bool Pose6::finite() const {
  return position.allFinite() && attitude.allFinite();
}

bool RigidTransform::is_rotation(double tol) const {
  Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol;
}

namespace {

Mat3 rot_x(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

Mat3 rot_y(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

Mat3 rot_z(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

}  // namespace

Mat3 rpy_to_matrix(const Vec3& attitude) {
  if (!attitude.allFinite())
    throw std::invalid_argument("rpy_to_matrix: attitude must be finite");
  return rot_x(attitude[0]) * rot_y(attitude[1]) * rot_z(attitude[2]);
}

Vec3 matrix_to_rpy(const Mat3& r) {
  // R = Rx*Ry*Rz puts sin(pitch) at (0,2).
  double sp = std::clamp(r(0, 2), -1.0, 1.0);
  double pitch = std::asin(sp);
  if (1.0 - std::abs(sp) < 1e-9) {
    // Gimbal lock: roll fixed to 0, remainder folded into yaw. With roll 0
    // the (1,0)/(1,1) entries encode yaw for both pitch signs.
    return Vec3(0.0, pitch, std::atan2(r(1, 0), r(1, 1)));
  }
  double roll = std::atan2(-r(1, 2), r(2, 2));
  double yaw = std::atan2(-r(0, 1), r(0, 0));
  return Vec3(roll, pitch, yaw);
}

RigidTransform pose_to_transform(const Pose6& pose) {
  return {rpy_to_matrix(pose.attitude), pose.position};
}

Vec6 pose_error(const Pose6& a, const Pose6& b) {
  Vec6 e;
  e.head<3>() = a.position - b.position;
  for (int i = 0; i < 3; ++i)
    e[3 + i] = wrap_angle(a.attitude[i] - b.attitude[i]);
  return e;
}

CameraModel CameraModel::look_at(double fx, double fy, int width, int height,
                                 const Vec3& eye, const Vec3& target,
                                 const Vec3& up) {
  Vec3 fwd = (target - eye).normalized();
  Vec3 right = fwd.cross(up).normalized();
  if (!right.allFinite() || right.norm() < 1e-9) {
    right = fwd.cross(Vec3(0, 1, 0)).normalized();
  }
  Vec3 down = fwd.cross(right);
  // Rows of the world->camera rotation are the camera axes in world frame.
  Mat3 rot;
  rot.row(0) = right.transpose();
  rot.row(1) = down.transpose();
  rot.row(2) = fwd.transpose();
  CameraModel cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  cam.extrinsic = {rot, -(rot * eye)};
  return cam;
}

std::optional<Vec2> project_point(const CameraModel& camera, const Vec3& p_world) {
  Vec3 pc = camera.extrinsic.apply(p_world);
  if (pc.z() <= 0.0) return std::nullopt;
  return Vec2(camera.fx * pc.x() / pc.z() + camera.cx,
              camera.fy * pc.y() / pc.z() + camera.cy);
}

ShapePrimitive ShapePrimitive::sphere(double radius, int budget) {
  return {ShapeKind::Sphere, Vec3(radius, 0, 0), budget};
}
ShapePrimitive ShapePrimitive::capsule(double radius, double length, int budget) {
  return {ShapeKind::Capsule, Vec3(radius, length, 0), budget};
}
ShapePrimitive ShapePrimitive::cylinder(double radius, double length, int budget) {
  return {ShapeKind::Cylinder, Vec3(radius, length, 0), budget};
}
ShapePrimitive ShapePrimitive::box(double hx, double hy, double hz, int budget) {
  return {ShapeKind::Box, Vec3(hx, hy, hz), budget};
}

bool ShapePrimitive::valid() const {
  if (tessellation_budget < 12) return false;
  switch (kind) {
    case ShapeKind::Sphere:
      return dims[0] > 0;
    case ShapeKind::Capsule:
    case ShapeKind::Cylinder:
      return dims[0] > 0 && dims[1] > 0;
    case ShapeKind::Box:
      return dims[0] > 0 && dims[1] > 0 && dims[2] > 0;
  }
  return false;
}

namespace {

// Ring-strip builders shared by the round primitives. Rings are indexed
// vertex lists of equal segment count; consecutive rings become quads split
// into two triangles each.
void connect_rings(std::vector<std::array<int, 3>>& tris,
                   const std::vector<int>& a, const std::vector<int>& b) {
  int n = static_cast<int>(a.size());
  for (int j = 0; j < n; ++j) {
    int jn = (j + 1) % n;
    tris.push_back({a[j], b[j], b[jn]});
    tris.push_back({a[j], b[jn], a[jn]});
  }
}

void connect_fan(std::vector<std::array<int, 3>>& tris, int apex,
                 const std::vector<int>& ring, bool flip) {
  int n = static_cast<int>(ring.size());
  for (int j = 0; j < n; ++j) {
    int jn = (j + 1) % n;
    if (flip)
      tris.push_back({apex, ring[jn], ring[j]});
    else
      tris.push_back({apex, ring[j], ring[jn]});
  }
}

std::vector<int> add_ring(TriangleMesh& mesh, double radius, double z, int segments) {
  std::vector<int> idx(segments);
  for (int j = 0; j < segments; ++j) {
    double a = 2.0 * kPi * j / segments;
    idx[j] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
  }
  return idx;
}

TriangleMesh tessellate_sphere(double r, int budget) {
  // Triangle count: 2 * seg * (lat - 1).
  int seg = std::max(6, static_cast<int>(std::sqrt(budget / 2.0) * 1.4));
  int lat = std::max(3, seg / 2);
  while (2 * seg * (lat - 1) > budget && seg > 6) {
    --seg;
    lat = std::max(3, seg / 2);
  }
  TriangleMesh mesh;
  int top = 0, bottom = 1;
  mesh.vertices.emplace_back(0, 0, r);
  mesh.vertices.emplace_back(0, 0, -r);
  std::vector<std::vector<int>> rings;
  for (int i = 1; i < lat; ++i) {
    double th = kPi * i / lat;
    rings.push_back(add_ring(mesh, r * std::sin(th), r * std::cos(th), seg));
  }
  connect_fan(mesh.triangles, top, rings.front(), false);
  for (size_t i = 0; i + 1 < rings.size(); ++i)
    connect_rings(mesh.triangles, rings[i], rings[i + 1]);
  connect_fan(mesh.triangles, bottom, rings.back(), true);
  return mesh;
}

TriangleMesh tessellate_capsule(double r, double len, int budget) {
  // Hemisphere bands + one cylinder band: 2 * seg * (2 * cap) triangles.
  int seg = std::max(6, static_cast<int>(std::sqrt(budget / 4.0) * 1.4));
  int cap = std::max(2, seg / 4);
  while (2 * seg * 2 * cap > budget && seg > 6) {
    --seg;
    cap = std::max(2, seg / 4);
  }
  double hz = len / 2.0;
  TriangleMesh mesh;
  int top = 0, bottom = 1;
  mesh.vertices.emplace_back(0, 0, hz + r);
  mesh.vertices.emplace_back(0, 0, -hz - r);
  std::vector<std::vector<int>> rings;
  for (int i = 1; i <= cap; ++i) {
    double th = (kPi / 2.0) * i / cap;
    rings.push_back(add_ring(mesh, r * std::sin(th), hz + r * std::cos(th), seg));
  }
  for (int i = cap; i >= 1; --i) {
    double th = (kPi / 2.0) * i / cap;
    rings.push_back(add_ring(mesh, r * std::sin(th), -hz - r * std::cos(th), seg));
  }
  connect_fan(mesh.triangles, top, rings.front(), false);
  for (size_t i = 0; i + 1 < rings.size(); ++i)
    connect_rings(mesh.triangles, rings[i], rings[i + 1]);
  connect_fan(mesh.triangles, bottom, rings.back(), true);
  return mesh;
}

TriangleMesh tessellate_cylinder(double r, double len, int budget) {
  int seg = std::max(6, budget / 4);
  seg = std::min(seg, 128);
  double hz = len / 2.0;
  TriangleMesh mesh;
  int top = 0, bottom = 1;
  mesh.vertices.emplace_back(0, 0, hz);
  mesh.vertices.emplace_back(0, 0, -hz);
  auto top_ring = add_ring(mesh, r, hz, seg);
  auto bot_ring = add_ring(mesh, r, -hz, seg);
  connect_fan(mesh.triangles, top, top_ring, false);
  connect_rings(mesh.triangles, top_ring, bot_ring);
  connect_fan(mesh.triangles, bottom, bot_ring, true);
  return mesh;
}

TriangleMesh tessellate_box(const Vec3& h) {
  TriangleMesh mesh;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back((i & 1) ? h.x() : -h.x(),
                               (i & 2) ? h.y() : -h.y(),
                               (i & 4) ? h.z() : -h.z());
  }
  // 12 triangles, two per face, consistent outward winding.
  const int f[12][3] = {{0, 2, 3}, {0, 3, 1},    // z = -hz
                        {4, 5, 7}, {4, 7, 6},    // z = +hz
                        {0, 1, 5}, {0, 5, 4},    // y = -hy
                        {2, 6, 7}, {2, 7, 3},    // y = +hy
                        {0, 4, 6}, {0, 6, 2},    // x = -hx
                        {1, 3, 7}, {1, 7, 5}};   // x = +hx
  for (auto& t : f) mesh.triangles.push_back({t[0], t[1], t[2]});
  return mesh;
}

}  // namespace

TriangleMesh tessellate(const ShapePrimitive& shape) {
  if (!shape.valid())
    throw std::invalid_argument("tessellate: invalid shape primitive");
  switch (shape.kind) {
    case ShapeKind::Sphere:
      return tessellate_sphere(shape.radius(), shape.tessellation_budget);
    case ShapeKind::Capsule:
      return tessellate_capsule(shape.radius(), shape.length(),
                                shape.tessellation_budget);
    case ShapeKind::Cylinder:
      return tessellate_cylinder(shape.radius(), shape.length(),
                                 shape.tessellation_budget);
    case ShapeKind::Box:
      return tessellate_box(shape.half_extents());
  }
  throw std::logic_error("tessellate: unknown shape kind");
}

bool is_watertight(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  for (const auto& [edge, count] : edge_count)
    if (count != 2) return false;
  return !mesh.triangles.empty();
}

namespace {

Vec3 nearest_local(const ShapePrimitive& shape, const Vec3& p) {
  switch (shape.kind) {
    case ShapeKind::Sphere: {
      double r = shape.radius();
      double n = p.norm();
      if (n < 1e-12) return Vec3(r, 0, 0);
      return p * (r / n);
    }
    case ShapeKind::Capsule: {
      double r = shape.radius();
      double hz = shape.length() / 2.0;
      Vec3 c(0, 0, std::clamp(p.z(), -hz, hz));
      Vec3 v = p - c;
      double n = v.norm();
      if (n < 1e-12) return c + Vec3(r, 0, 0);
      return c + v * (r / n);
    }
    case ShapeKind::Cylinder: {
      double r = shape.radius();
      double hz = shape.length() / 2.0;
      double rho = std::hypot(p.x(), p.y());
      Vec3 radial = rho < 1e-12 ? Vec3(1, 0, 0) : Vec3(p.x() / rho, p.y() / rho, 0);
      bool inside = rho <= r && std::abs(p.z()) <= hz;
      if (inside) {
        double to_side = r - rho;
        double to_cap = hz - std::abs(p.z());
        if (to_side <= to_cap) return radial * r + Vec3(0, 0, p.z());
        double zc = p.z() >= 0 ? hz : -hz;
        return Vec3(p.x(), p.y(), zc);
      }
      double zc = std::clamp(p.z(), -hz, hz);
      if (rho <= r) return Vec3(p.x(), p.y(), p.z() >= 0 ? hz : -hz);
      if (std::abs(p.z()) <= hz) return radial * r + Vec3(0, 0, zc);
      return radial * r + Vec3(0, 0, p.z() >= 0 ? hz : -hz);  // rim
    }
    case ShapeKind::Box: {
      Vec3 h = shape.half_extents();
      Vec3 q(std::clamp(p.x(), -h.x(), h.x()), std::clamp(p.y(), -h.y(), h.y()),
             std::clamp(p.z(), -h.z(), h.z()));
      if ((q - p).norm() > 1e-12) return q;
      // Interior: push out through the closest face.
      int axis = 0;
      double best = h.x() - std::abs(p.x());
      for (int i = 1; i < 3; ++i) {
        double gap = h[i] - std::abs(p[i]);
        if (gap < best) {
          best = gap;
          axis = i;
        }
      }
      q[axis] = p[axis] >= 0 ? h[axis] : -h[axis];
      return q;
    }
  }
  throw std::logic_error("nearest_local: unknown shape kind");
}

}  // namespace

Vec3 nearest_surface_point(const ShapePrimitive& shape, const Pose6& pose,
                           const Vec3& query_world) {
  RigidTransform tf = pose_to_transform(pose);
  Vec3 local = tf.inverse().apply(query_world);
  return tf.apply(nearest_local(shape, local));
}

}  // namespace occlufuse
