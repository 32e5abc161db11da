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

#include "occlufuse/vision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "occlufuse/errors.hpp"
#include "raster_internal.hpp"

namespace occlufuse {

double mask_overlap(const Mask& m, const Mask& m_hat) {
  if (!m.valid() || !m_hat.valid() || m.height != m_hat.height ||
      m.width != m_hat.width)
    throw std::invalid_argument("mask_overlap: dimension mismatch");
  long hamming = 0;
  for (std::size_t i = 0; i < m.labels.size(); ++i)
    hamming += (m.labels[i] != 0) != (m_hat.labels[i] != 0) ? 1 : 0;
  // The score is the identity 1 - 2*Hamming/(w*h), evaluated in this exact
  // form so independent recomputations match bit for bit.
  return 1.0 - 2.0 * static_cast<double>(hamming) /
                   static_cast<double>(m.labels.size());
}

namespace {

// Pre-tessellated scene plus the double-resolution camera the soft
// objective renders through.
struct SoftScene {
  TriangleMesh target;
  std::vector<PosedMesh> occluders;
  CameraModel cam2x;
  int out_h = 0, out_w = 0;

  // Reusable raster buffers. Occluders do not move between score calls, so
  // their depth layer is rendered once; each call restores the rectangle the
  // previous target raster may have written, then repaints only the target.
  mutable Mask scratch;
  mutable std::vector<double> scratch_z;
  mutable Mask base;
  mutable std::vector<double> base_z;
  mutable detail::PixelRect dirty;
  mutable bool buffers_ready = false;
  // The score decomposes into a constant term from the observed mask plus a
  // correction over covered pixels only; cache the constant per mask buffer.
  mutable const std::uint8_t* baseline_key = nullptr;
  mutable long baseline_acc = 0;

  SoftScene(const ShapePrimitive& shape, const CameraModel& camera,
            std::span<const std::pair<ShapePrimitive, Pose6>> occ) {
    if (!camera.valid())
      throw std::invalid_argument("vision: invalid camera");
    if (!shape.valid())
      throw std::invalid_argument("vision: invalid shape");
    target = tessellate(shape);
    occluders.reserve(occ.size());
    for (const auto& [s, p] : occ) occluders.push_back({tessellate(s), p});
    cam2x = camera;
    cam2x.fx *= 2.0;
    cam2x.fy *= 2.0;
    cam2x.cx *= 2.0;
    cam2x.cy *= 2.0;
    cam2x.width *= 2;
    cam2x.height *= 2;
    out_h = camera.height;
    out_w = camera.width;
  }

  void ensure_buffers() const {
    if (buffers_ready) return;
    base = Mask::zeros(cam2x.height, cam2x.width);
    base_z.assign(base.labels.size(), 0.0);
    for (const auto& occ : occluders)
      detail::raster_mesh(occ.mesh,
                          cam2x.extrinsic.compose(pose_to_transform(occ.pose)),
                          cam2x, 0, base_z, base);
    scratch = base;
    scratch_z = base_z;
    dirty = {};
    buffers_ready = true;
  }

  // Overlap of the observed mask with the box-downsampled high-resolution
  // render. Integer accumulation keeps the result order-independent: each
  // pixel contributes sign * (subpixel_count - 2) half-units. Pixels the
  // render never covers contribute sign * (0 - 2) each, which sums to a
  // constant of the observed mask alone; only covered pixels need a walk.
  double score(const Mask& observed, const Pose6& pose) const {
    ensure_buffers();
    if (!dirty.empty()) {
      for (int r = dirty.r0; r <= dirty.r1; ++r) {
        const std::size_t row = static_cast<std::size_t>(r) * cam2x.width;
        const std::size_t len = static_cast<std::size_t>(dirty.c1 - dirty.c0) + 1;
        std::copy_n(base.labels.begin() + row + dirty.c0, len,
                    scratch.labels.begin() + row + dirty.c0);
        std::copy_n(base_z.begin() + row + dirty.c0, len,
                    scratch_z.begin() + row + dirty.c0);
      }
    }
    detail::PixelRect touched;
    detail::raster_mesh(target, cam2x.extrinsic.compose(pose_to_transform(pose)),
                        cam2x, 1, scratch_z, scratch, &touched);
    dirty = touched;

    if (baseline_key != observed.labels.data()) {
      const long n_fg = observed.count_nonzero();
      const long n = static_cast<long>(observed.labels.size());
      baseline_acc = -2 * (2 * n_fg - n);
      baseline_key = observed.labels.data();
    }

    long acc = baseline_acc;
    if (!touched.empty()) {
      const int lr0 = touched.r0 / 2, lr1 = touched.r1 / 2;
      const int lc0 = touched.c0 / 2, lc1 = touched.c1 / 2;
      for (int r = lr0; r <= lr1; ++r) {
        for (int c = lc0; c <= lc1; ++c) {
          const int s =
              (scratch.at(2 * r, 2 * c) != 0) + (scratch.at(2 * r, 2 * c + 1) != 0) +
              (scratch.at(2 * r + 1, 2 * c) != 0) +
              (scratch.at(2 * r + 1, 2 * c + 1) != 0);
          if (s != 0) acc += (observed.at(r, c) != 0 ? 1 : -1) * s;
        }
      }
    }
    return static_cast<double>(acc) /
           (2.0 * static_cast<double>(out_h) * static_cast<double>(out_w));
  }

  Vec6 gradient(const Mask& observed, const Pose6& pose, const Vec6& steps) const {
    Vec6 g = Vec6::Zero();
    const Vec6 x = pose.vector();
    for (int i = 0; i < 6; ++i) {
      Vec6 hi_v = x, lo_v = x;
      hi_v[i] += steps[i];
      lo_v[i] -= steps[i];
      g[i] = (score(observed, Pose6::from_vector(hi_v)) -
              score(observed, Pose6::from_vector(lo_v))) /
             (2.0 * steps[i]);
    }
    return g;
  }
};

void check_observed(const Mask& observed, const CameraModel& camera) {
  if (!observed.valid() || observed.height != camera.height ||
      observed.width != camera.width)
    throw std::invalid_argument("vision: observed mask does not match camera size");
}

}  // namespace

double vision_score(const Mask& observed, const Pose6& pose,
                    const ShapePrimitive& shape, const CameraModel& camera,
                    std::span<const std::pair<ShapePrimitive, Pose6>> occluders) {
  check_observed(observed, camera);
  return SoftScene(shape, camera, occluders).score(observed, pose);
}

Vec6 default_vision_steps(const Pose6& pose, const CameraModel& camera) {
  const double depth =
      std::max(camera.extrinsic.apply(pose.position).z(), 0.2);
  const double focal = std::max(std::min(camera.fx, camera.fy), 1.0);
  const double t_step = depth / focal;           // ~1 px silhouette shift
  const double r_step = 0.5 * M_PI / 180.0;      // half a degree
  Vec6 steps;
  steps << t_step, t_step, t_step, r_step, r_step, r_step;
  return steps;
}

Vec6 estimate_jacobian(const Mask& observed, const Pose6& pose,
                       const ShapePrimitive& shape, const CameraModel& camera,
                       std::span<const std::pair<ShapePrimitive, Pose6>> occluders,
                       const Vec6& steps) {
  check_observed(observed, camera);
  for (int i = 0; i < 6; ++i)
    if (!(steps[i] > 0.0))
      throw std::invalid_argument("estimate_jacobian: steps must be positive");
  return SoftScene(shape, camera, occluders).gradient(observed, pose, steps);
}

VisionPoseEstimate estimate_pose_vision(
    const Mask& observed, const Pose6& prior, const ShapePrimitive& shape,
    const CameraModel& camera,
    std::span<const std::pair<ShapePrimitive, Pose6>> occluders) {
  check_observed(observed, camera);
  if (observed.count_nonzero() == 0)
    throw LostTrackError("estimate_pose_vision: observed mask is empty");

  const SoftScene scene(shape, camera, occluders);
  Pose6 pose = prior.wrapped();
  double score = scene.score(observed, pose);
  if (score <= -1.0 + 1e-12)
    throw LostTrackError("estimate_pose_vision: prior fully contradicts the mask");

  constexpr int kMaxIterations = 100;
  constexpr double kImprovementTol = 1e-5;
  double alpha = 4.0;  // line-search scale, in pixel-equivalent units

  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIterations && !converged; ) {
    ++iter;
    const Vec6 steps = default_vision_steps(pose, camera);
    const Vec6 g = scene.gradient(observed, pose, steps);

    // Score change per one-step move along each axis; its norm is the
    // ascent direction in step-normalized coordinates.
    Vec6 u = g.cwiseProduct(steps);
    const double unorm = u.norm();
    if (unorm == 0.0) {
      converged = true;
      break;
    }
    u /= unorm;

    bool improved = false;
    double gain = 0.0;
    for (int bt = 0; bt < 12; ++bt) {
      Vec6 cand_v = pose.vector() + alpha * u.cwiseProduct(steps);
      const Pose6 cand = Pose6::from_vector(cand_v).wrapped();
      const double cs = scene.score(observed, cand);
      if (cs > score) {
        gain = cs - score;
        pose = cand;
        score = cs;
        alpha = std::min(alpha * 2.0, 64.0);
        improved = true;
        break;
      }
      alpha = std::max(alpha * 0.5, 1.0 / 64.0);
    }
    if (!improved || gain < kImprovementTol) converged = true;
  }

  // The gradient loop stops once gains drop below its tolerance, which is
  // coarser than a single supersample hit; a shrinking axis-wise pattern
  // search grinds out the remaining integer half-units so the result is
  // at least as good as any nearby coarse-grid pose.
  for (const double scale : {16.0, 8.0, 4.0, 2.0, 1.0}) {
    const Vec6 steps = scale * default_vision_steps(pose, camera);
    for (int round = 0; round < 40; ++round) {
      bool any = false;
      for (int axis = 0; axis < 6; ++axis) {
        for (const double sgn : {1.0, -1.0}) {
          Vec6 v = pose.vector();
          v[axis] += sgn * steps[axis];
          const Pose6 cand = Pose6::from_vector(v).wrapped();
          const double cs = scene.score(observed, cand);
          if (cs > score) {
            pose = cand;
            score = cs;
            any = true;
          }
        }
      }
      if (!any) break;
    }
  }

  if (score < 0.0)
    throw LostTrackError("estimate_pose_vision: best score is negative");
  if (render_mask(scene.target, pose, scene.cam2x, scene.occluders).count_nonzero() == 0)
    throw LostTrackError("estimate_pose_vision: object left the frustum");

  VisionPoseEstimate est;
  est.pose = pose;
  est.score = score;
  est.iterations = iter;
  est.converged = converged;
  return est;
}

std::vector<Pose6> make_pose_lattice(const Pose6& center, const Vec6& half_range,
                                     int steps_per_axis) {
  if (steps_per_axis < 1)
    throw std::invalid_argument("make_pose_lattice: steps_per_axis must be >= 1");
  for (int i = 0; i < 6; ++i)
    if (!(half_range[i] >= 0.0) || !std::isfinite(half_range[i]))
      throw std::invalid_argument("make_pose_lattice: half_range must be finite and >= 0");

  std::array<std::vector<double>, 6> axis_values;
  for (int i = 0; i < 6; ++i) {
    if (half_range[i] == 0.0 || steps_per_axis == 1) {
      axis_values[i] = {center.vector()[i]};
    } else {
      for (int k = 0; k < steps_per_axis; ++k)
        axis_values[i].push_back(center.vector()[i] - half_range[i] +
                                 2.0 * half_range[i] * k / (steps_per_axis - 1));
    }
  }

  std::size_t total = 1;
  for (const auto& v : axis_values) total *= v.size();
  std::vector<Pose6> grid;
  grid.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    Vec6 v;
    for (int i = 5; i >= 0; --i) {
      v[i] = axis_values[i][rem % axis_values[i].size()];
      rem /= axis_values[i].size();
    }
    grid.push_back(Pose6::from_vector(v));
  }
  return grid;
}

BruteForceResult brute_force_pose_search(const Mask& observed,
                                         std::span<const Pose6> grid,
                                         const ShapePrimitive& shape,
                                         const CameraModel& camera) {
  if (grid.empty())
    throw std::invalid_argument("brute_force_pose_search: empty grid");
  check_observed(observed, camera);
  const SoftScene scene(shape, camera, {});

  BruteForceResult best;
  best.score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = scene.score(observed, grid[i]);
    if (s > best.score) {
      best.score = s;
      best.pose = grid[i];
      best.index = i;
    }
  }
  return best;
}

}  // namespace occlufuse
