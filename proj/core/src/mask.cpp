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

#include "occlufuse/mask.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

#include "occlufuse/errors.hpp"
#include "occlufuse/rng.hpp"
#include "raster_internal.hpp"

namespace occlufuse {

int Mask::count_nonzero() const {
  return static_cast<int>(
      std::count_if(labels.begin(), labels.end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

constexpr double kNearPlane = 1e-4;  // m, camera-frame clip depth

struct ScreenVertex {
  double x, y;      // pixel coordinates
  double inv_z;     // 1/depth, linear in screen space
};

double edge(const ScreenVertex& p0, const ScreenVertex& p1, double px, double py) {
  return (p1.x - p0.x) * (py - p0.y) - (p1.y - p0.y) * (px - p0.x);
}

void fill_triangle(const ScreenVertex& a, const ScreenVertex& b,
                   const ScreenVertex& c, std::uint8_t label,
                   std::vector<double>& inv_z, Mask& out,
                   detail::PixelRect* touched) {
  double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (std::abs(area) < 1e-12) return;
  const double sign = area > 0 ? 1.0 : -1.0;
  area *= sign;

  const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}) - 0.5)));
  const int x1 = std::min(out.width - 1,
                          static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}) - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}) - 0.5)));
  const int y1 = std::min(out.height - 1,
                          static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}) - 0.5)));
  if (x1 < x0 || y1 < y0) return;
  if (touched) touched->merge(y0, x0, y1, x1);

  for (int r = y0; r <= y1; ++r) {
    const double py = r + 0.5;
    for (int col = x0; col <= x1; ++col) {
      const double px = col + 0.5;
      const double e0 = sign * edge(b, c, px, py);
      const double e1 = sign * edge(c, a, px, py);
      const double e2 = sign * edge(a, b, px, py);
      if (e0 < 0 || e1 < 0 || e2 < 0) continue;
      const double w = (e0 * a.inv_z + e1 * b.inv_z + e2 * c.inv_z) / area;
      const std::size_t idx = static_cast<std::size_t>(r) * out.width + col;
      if (w > inv_z[idx]) {
        inv_z[idx] = w;
        out.labels[idx] = label;
      }
    }
  }
}

ScreenVertex to_screen(const CameraModel& cam, const Vec3& p_cam) {
  return {cam.fx * p_cam.x() / p_cam.z() + cam.cx,
          cam.fy * p_cam.y() / p_cam.z() + cam.cy, 1.0 / p_cam.z()};
}

// Clips one camera-frame triangle against z = kNearPlane, projects, and
// rasterizes the surviving polygon as a fan.
void raster_triangle(const CameraModel& cam, const Vec3& v0, const Vec3& v1,
                     const Vec3& v2, std::uint8_t label,
                     std::vector<double>& inv_z, Mask& out,
                     detail::PixelRect* touched) {
  const Vec3 in[3] = {v0, v1, v2};
  Vec3 poly[4];
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& cur = in[i];
    const Vec3& nxt = in[(i + 1) % 3];
    const bool cur_in = cur.z() > kNearPlane;
    const bool nxt_in = nxt.z() > kNearPlane;
    if (cur_in) poly[n++] = cur;
    if (cur_in != nxt_in) {
      const double t = (kNearPlane - cur.z()) / (nxt.z() - cur.z());
      poly[n++] = cur + t * (nxt - cur);
    }
  }
  if (n < 3) return;
  ScreenVertex s[4];
  for (int i = 0; i < n; ++i) s[i] = to_screen(cam, poly[i]);
  for (int i = 2; i < n; ++i)
    fill_triangle(s[0], s[i - 1], s[i], label, inv_z, out, touched);
}

}  // namespace

namespace detail {

void raster_mesh(const TriangleMesh& mesh, const RigidTransform& local_to_cam,
                 const CameraModel& cam, std::uint8_t label,
                 std::vector<double>& inv_z, Mask& out, PixelRect* touched) {
  std::vector<Vec3> cam_verts(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    cam_verts[i] = local_to_cam.apply(mesh.vertices[i]);
  for (const auto& tri : mesh.triangles)
    raster_triangle(cam, cam_verts[tri[0]], cam_verts[tri[1]], cam_verts[tri[2]],
                    label, inv_z, out, touched);
}

}  // namespace detail

namespace {
using detail::raster_mesh;
}  // namespace

Mask render_mask(const ShapePrimitive& shape, const Pose6& pose,
                 const CameraModel& camera,
                 std::span<const std::pair<ShapePrimitive, Pose6>> occluders) {
  if (!camera.valid())
    throw std::invalid_argument("render_mask: invalid camera");
  if (!shape.valid())
    throw std::invalid_argument("render_mask: invalid shape");

  Mask out = Mask::zeros(camera.height, camera.width);
  std::vector<double> inv_z(out.labels.size(), 0.0);

  const TriangleMesh target = tessellate(shape);
  raster_mesh(target, camera.extrinsic.compose(pose_to_transform(pose)), camera,
              1, inv_z, out);
  for (const auto& [occ_shape, occ_pose] : occluders) {
    const TriangleMesh occ = tessellate(occ_shape);
    raster_mesh(occ, camera.extrinsic.compose(pose_to_transform(occ_pose)),
                camera, 0, inv_z, out);
  }
  return out;
}

Mask render_mask(const TriangleMesh& target_mesh, const Pose6& pose,
                 const CameraModel& camera, std::span<const PosedMesh> occluders) {
  if (!camera.valid())
    throw std::invalid_argument("render_mask: invalid camera");
  Mask out = Mask::zeros(camera.height, camera.width);
  std::vector<double> inv_z(out.labels.size(), 0.0);
  raster_mesh(target_mesh, camera.extrinsic.compose(pose_to_transform(pose)),
              camera, 1, inv_z, out);
  for (const auto& occ : occluders)
    raster_mesh(occ.mesh, camera.extrinsic.compose(pose_to_transform(occ.pose)),
                camera, 0, inv_z, out);
  return out;
}

double occlusion_fraction(const Mask& full, const Mask& visible) {
  if (!full.valid() || !visible.valid() || full.height != visible.height ||
      full.width != visible.width)
    throw std::invalid_argument("occlusion_fraction: dimension mismatch");
  const double total = full.count_nonzero();
  if (total == 0)
    throw NumericalError("occlusion_fraction: unoccluded mask is empty");
  const double seen = visible.count_nonzero();
  return std::clamp((total - seen) / total, 0.0, 1.0);
}

Mask degrade_mask(const Mask& truth, double occlusion_target, double pixel_noise,
                  std::uint64_t rng_seed) {
  if (!truth.valid())
    throw std::invalid_argument("degrade_mask: invalid mask");
  if (!(occlusion_target >= 0.0 && occlusion_target < 1.0))
    throw std::invalid_argument("degrade_mask: occlusion_target outside [0,1)");
  if (!(pixel_noise >= 0.0 && pixel_noise <= 0.1))
    throw std::invalid_argument("degrade_mask: pixel_noise outside [0,0.1]");

  std::vector<int> target_pixels;
  for (int i = 0; i < truth.height * truth.width; ++i)
    if (truth.labels[i] != 0) target_pixels.push_back(i);
  if (target_pixels.empty())
    throw std::invalid_argument("degrade_mask: mask has no target pixels");

  Mask out = truth;
  Rng rng(rng_seed);

  const int remove = static_cast<int>(
      std::llround(occlusion_target * static_cast<double>(target_pixels.size())));
  if (remove > 0) {
    // Start from a random target pixel that touches background or the image
    // border, so the removed blob grows inward from the silhouette edge.
    std::vector<int> boundary;
    for (int idx : target_pixels) {
      const int r = idx / truth.width, c = idx % truth.width;
      const bool edge_pixel =
          r == 0 || c == 0 || r == truth.height - 1 || c == truth.width - 1 ||
          truth.at(r - 1, c) == 0 || truth.at(r + 1, c) == 0 ||
          truth.at(r, c - 1) == 0 || truth.at(r, c + 1) == 0;
      if (edge_pixel) boundary.push_back(idx);
    }
    const auto& seeds = boundary.empty() ? target_pixels : boundary;
    const int start = seeds[rng.uniform_index(seeds.size())];

    std::vector<char> visited(out.labels.size(), 0);
    std::deque<int> queue{start};
    visited[start] = 1;
    int removed = 0;
    while (!queue.empty() && removed < remove) {
      const int idx = queue.front();
      queue.pop_front();
      out.labels[idx] = 0;
      ++removed;
      const int r = idx / truth.width, c = idx % truth.width;
      const int neighbors[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& [nr, nc] : neighbors) {
        if (nr < 0 || nc < 0 || nr >= truth.height || nc >= truth.width) continue;
        const int nidx = nr * truth.width + nc;
        if (!visited[nidx] && truth.labels[nidx] != 0) {
          visited[nidx] = 1;
          queue.push_back(nidx);
        }
      }
    }
  }

  if (pixel_noise > 0.0) {
    for (auto& v : out.labels)
      if (rng.uniform() < pixel_noise) v = v == 0 ? 1 : 0;
  }
  return out;
}

void write_pgm(const Mask& mask, const std::string& path) {
  if (!mask.valid()) throw std::invalid_argument("write_pgm: invalid mask");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_pgm: cannot open " + path);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(mask.labels.data()),
            static_cast<std::streamsize>(mask.labels.size()));
  if (!out) throw ConfigError("write_pgm: write failed for " + path);
}

}  // namespace occlufuse
