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

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"
#include "occlufuse/geometry.hpp"
#include "occlufuse/rng.hpp"

namespace occlufuse {
namespace {

constexpr double kPi = std::numbers::pi;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("wrap_angle maps into (-pi, pi] and is 2pi-periodic") {
  CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double x = (rng.uniform() - 0.5) * 40.0;
    const double w = wrap_angle(x);
    CHECK(w > -kPi - 1e-12);
    CHECK(w <= kPi + 1e-12);
    CHECK(std::remainder(w - x, 2 * kPi) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(wrap_angle(x + 4 * kPi) == doctest::Approx(w).epsilon(1e-9));
  }
}

TEST_CASE("attitude matrix round trip preserves angles and orthonormality") {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const Vec3 rpy((rng.uniform() - 0.5) * 2 * kPi,
                   (rng.uniform() - 0.5) * 2.8,  // stay clear of the pitch poles
                   (rng.uniform() - 0.5) * 2 * kPi);
    const Mat3 r = rpy_to_matrix(rpy);
    CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    const Vec3 back = matrix_to_rpy(r);
    for (int a = 0; a < 3; ++a)
      CHECK(wrap_angle(back[a] - rpy[a]) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("pose_error wraps the attitude residual across the seam") {
  Pose6 a;
  a.attitude = Vec3(0.0, 0.0, 3.1);
  Pose6 b;
  b.attitude = Vec3(0.0, 0.0, -3.1);
  const Vec6 err = pose_error(a, b);
  // 3.1 - (-3.1) = 6.2, re-wrapped across the +/- pi seam.
  CHECK(err[5] == doctest::Approx(-0.08318530717958605).epsilon(1e-12));
  CHECK(err.head<3>().norm() == doctest::Approx(0.0));
}

TEST_CASE("rigid transforms compose and invert") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    Pose6 p;
    p.position = Vec3(rng.gaussian(0, 1), rng.gaussian(0, 1), rng.gaussian(0, 1));
    p.attitude = Vec3((rng.uniform() - 0.5) * 3, (rng.uniform() - 0.5) * 2.8,
                      (rng.uniform() - 0.5) * 3);
    const RigidTransform t = pose_to_transform(p);
    CHECK(t.is_rotation());
    const RigidTransform round = t.compose(t.inverse());
    CHECK((round.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(round.translation.norm() < 1e-12);
    const Vec3 x(rng.gaussian(0, 1), rng.gaussian(0, 1), rng.gaussian(0, 1));
    CHECK((t.inverse().apply(t.apply(x)) - x).norm() < 1e-12);
  }
}

TEST_CASE("pinhole projection puts a centered point on the principal axis") {
  CameraModel cam;
  cam.fx = 100.0;
  cam.fy = 100.0;
  cam.cx = 50.0;
  cam.cy = 50.0;
  cam.width = 100;
  cam.height = 100;
  const auto uv = project_point(cam, Vec3(0.1, 0.0, 1.0));
  REQUIRE(uv.has_value());
  CHECK(uv->x() == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(uv->y() == doctest::Approx(50.0).epsilon(1e-12));
  CHECK_FALSE(project_point(cam, Vec3(0.0, 0.0, -1.0)).has_value());
}

TEST_CASE("look_at camera centers its target at the principal point") {
  const CameraModel cam = CameraModel::look_at(
      320.0, 320.0, 320, 240, Vec3(0.0, 0.0, 1.2), Vec3(2.0, 0.3, 1.0));
  CHECK(cam.valid());
  CHECK((cam.position_world() - Vec3(0.0, 0.0, 1.2)).norm() < 1e-12);
  const auto uv = project_point(cam, Vec3(2.0, 0.3, 1.0));
  REQUIRE(uv.has_value());
  CHECK(uv->x() == doctest::Approx(cam.cx).epsilon(1e-9));
  CHECK(uv->y() == doctest::Approx(cam.cy).epsilon(1e-9));
}

TEST_CASE("all primitive tessellations are watertight") {
  const ShapePrimitive shapes[] = {
      ShapePrimitive::sphere(0.05), ShapePrimitive::capsule(0.045, 0.30),
      ShapePrimitive::cylinder(0.04, 0.25), ShapePrimitive::box(0.05, 0.08, 0.03)};
  for (const auto& shape : shapes) {
    const TriangleMesh mesh = tessellate(shape);
    CHECK(mesh.triangles.size() > 0);
    CHECK(static_cast<int>(mesh.triangles.size()) <= shape.tessellation_budget);
    CHECK(is_watertight(mesh));
  }
  const TriangleMesh coarse = tessellate(ShapePrimitive::sphere(0.05, 64));
  CHECK(is_watertight(coarse));
  CHECK(coarse.triangles.size() <= 64);
}

TEST_CASE("sphere tessellation vertices sit on the surface") {
  const double r = 0.07;
  const TriangleMesh mesh = tessellate(ShapePrimitive::sphere(r));
  for (const auto& v : mesh.vertices)
    CHECK(v.norm() == doctest::Approx(r).epsilon(1e-9));
}

// Independent re-derivation of the closest surface point, one shape at a
// time, against which the shipped routine is checked.
Vec3 sphere_closest(double r, const Vec3& p_local) {
  const double n = p_local.norm();
  if (n < 1e-12) return Vec3(r, 0, 0);
  return p_local * (r / n);
}

TEST_CASE("nearest point on a sphere is radial from both sides") {
  const double r = 0.05;
  const ShapePrimitive shape = ShapePrimitive::sphere(r);
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    Pose6 pose;
    pose.position = Vec3(rng.gaussian(0, 0.5), rng.gaussian(0, 0.5),
                         rng.gaussian(0, 0.5));
    pose.attitude = Vec3((rng.uniform() - 0.5), (rng.uniform() - 0.5),
                         (rng.uniform() - 0.5));
    // Sample a query point outside on even trials, inside on odd ones.
    const double rad = (i % 2 == 0) ? r * (1.5 + rng.uniform())
                                    : r * rng.uniform() * 0.9;
    Vec3 dir(rng.gaussian(0, 1), rng.gaussian(0, 1), rng.gaussian(0, 1));
    dir.normalize();
    const Vec3 query = pose.position + rad * dir;
    const Vec3 got = nearest_surface_point(shape, pose, query);
    const RigidTransform t = pose_to_transform(pose);
    const Vec3 expected =
        t.apply(sphere_closest(r, t.inverse().apply(query)));
    CHECK((got - expected).norm() < 1e-9);
  }
}

Vec3 box_closest(const Vec3& he, const Vec3& p) {
  const Vec3 clamped(std::clamp(p.x(), -he.x(), he.x()),
                     std::clamp(p.y(), -he.y(), he.y()),
                     std::clamp(p.z(), -he.z(), he.z()));
  if ((clamped - p).norm() > 1e-15) return clamped;  // outside: plain clamp
  // Inside: push out through the nearest face.
  Vec3 out = clamped;
  double best = he.x() - std::abs(p.x());
  int axis = 0;
  if (he.y() - std::abs(p.y()) < best) { best = he.y() - std::abs(p.y()); axis = 1; }
  if (he.z() - std::abs(p.z()) < best) { axis = 2; }
  out[axis] = p[axis] >= 0 ? he[axis] : -he[axis];
  return out;
}

TEST_CASE("nearest point on a box matches the clamp construction") {
  const Vec3 he(0.05, 0.08, 0.03);
  const ShapePrimitive shape = ShapePrimitive::box(he.x(), he.y(), he.z());
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    Pose6 pose;
    pose.position = Vec3(rng.gaussian(0, 0.3), rng.gaussian(0, 0.3),
                         rng.gaussian(0, 0.3));
    pose.attitude = Vec3((rng.uniform() - 0.5), (rng.uniform() - 0.5),
                         (rng.uniform() - 0.5));
    const RigidTransform t = pose_to_transform(pose);
    const Vec3 local(rng.gaussian(0, 0.08), rng.gaussian(0, 0.08),
                     rng.gaussian(0, 0.08));
    const Vec3 got = nearest_surface_point(shape, pose, t.apply(local));
    const Vec3 expected = t.apply(box_closest(he, local));
    CHECK((got - expected).norm() < 1e-9);
  }
}

TEST_CASE("nearest point on capsule and cylinder lies on the surface") {
  const double r = 0.045;
  const double len = 0.30;
  const ShapePrimitive caps[] = {ShapePrimitive::capsule(r, len),
                                 ShapePrimitive::cylinder(r, len)};
  Rng rng(16);
  for (const auto& shape : caps) {
    for (int i = 0; i < 200; ++i) {
      Pose6 pose;
      pose.position = Vec3(rng.gaussian(0, 0.3), rng.gaussian(0, 0.3),
                           rng.gaussian(0, 0.3));
      pose.attitude = Vec3((rng.uniform() - 0.5) * 2, (rng.uniform() - 0.5),
                           (rng.uniform() - 0.5) * 2);
      const RigidTransform t = pose_to_transform(pose);
      const Vec3 local(rng.gaussian(0, 0.15), rng.gaussian(0, 0.15),
                       rng.gaussian(0, 0.25));
      const Vec3 sp_local = t.inverse().apply(
          nearest_surface_point(shape, pose, t.apply(local)));
      const double half = len / 2;
      if (shape.kind == ShapeKind::Capsule) {
        // Distance to the segment spine equals the radius.
        const double z = std::clamp(sp_local.z(), -half, half);
        const double d = (sp_local - Vec3(0, 0, z)).norm();
        CHECK(d == doctest::Approx(r).epsilon(1e-9));
      } else {
        const bool on_tube =
            std::abs(sp_local.head<2>().norm() - r) < 1e-9 &&
            sp_local.z() > -half - 1e-9 && sp_local.z() < half + 1e-9;
        const bool on_cap = std::abs(std::abs(sp_local.z()) - half) < 1e-9 &&
                            sp_local.head<2>().norm() < r + 1e-9;
        CHECK((on_tube || on_cap));
      }
    }
  }
}

TEST_CASE("nearest surface point is the true distance minimizer") {
  // Sampling oracle: no mesh vertex may be closer than the reported point.
  const ShapePrimitive shapes[] = {
      ShapePrimitive::capsule(0.045, 0.30, 2048),
      ShapePrimitive::cylinder(0.04, 0.25, 2048),
      ShapePrimitive::box(0.05, 0.08, 0.03, 512)};
  Rng rng(17);
  for (const auto& shape : shapes) {
    const TriangleMesh mesh = tessellate(shape);
    Pose6 pose;
    pose.position = Vec3(0.2, -0.1, 0.4);
    pose.attitude = Vec3(0.3, -0.2, 0.9);
    const RigidTransform t = pose_to_transform(pose);
    for (int i = 0; i < 50; ++i) {
      const Vec3 query(rng.gaussian(0.2, 0.3), rng.gaussian(-0.1, 0.3),
                       rng.gaussian(0.4, 0.3));
      const double got = (nearest_surface_point(shape, pose, query) - query).norm();
      for (const auto& v : mesh.vertices) {
        const double dv = (t.apply(v) - query).norm();
        CHECK(got <= dv + 1e-9);
      }
    }
  }
}

TEST_CASE("pose vector round trip") {
  Pose6 p;
  p.position = Vec3(1.0, -2.0, 3.0);
  p.attitude = Vec3(0.1, -0.2, 0.3);
  const Pose6 q = Pose6::from_vector(p.vector());
  CHECK((q.position - p.position).norm() == doctest::Approx(0.0));
  CHECK((q.attitude - p.attitude).norm() == doctest::Approx(0.0));
  CHECK(p.finite());
}

TEST_SUITE_END();

}  // namespace
}  // namespace occlufuse
