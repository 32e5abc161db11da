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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "occlufuse/geometry.hpp"
#include "occlufuse/mask.hpp"

namespace occlufuse {

/// Silhouette-matching result. `score` is the overlap objective value at
/// the returned pose, in [-1, 1]; `converged` reports whether the ascent
/// reached stationarity before the iteration cap.
struct VisionPoseEstimate {
  Pose6 pose;
  double score = -1.0;
  int iterations = 0;
  bool converged = false;
};

/// Overlap score of two equally sized masks after binarization (any
/// nonzero label counts as foreground): each agreeing pixel contributes
/// +1/(w*h), each disagreeing pixel -1/(w*h). Identical masks score 1,
/// complementary masks -1; equals 1 - 2*hamming/(w*h) exactly. Throws
/// std::invalid_argument on dimension mismatch.
double mask_overlap(const Mask& m, const Mask& m_hat);

/// Objective the pose search ascends: mask_overlap between the observed
/// mask and a quantization-softened candidate render of the shape at
/// `pose` (rendered at twice the camera resolution with the given
/// occluders, then box-downsampled, so sub-pixel pose changes move the
/// score). Exactly mask_overlap when the downsampled render is binary.
double vision_score(const Mask& observed, const Pose6& pose,
                    const ShapePrimitive& shape, const CameraModel& camera,
                    std::span<const std::pair<ShapePrimitive, Pose6>> occluders = {});

/// Per-axis finite-difference steps for silhouette matching: translations
/// sized so the silhouette moves about one pixel (depth/fx), rotations a
/// half degree.
Vec6 default_vision_steps(const Pose6& pose, const CameraModel& camera);

/// Central finite-difference gradient of vision_score along each pose
/// axis: (f(p + step_i) - f(p - step_i)) / (2 step_i). Steps must be
/// positive componentwise. A zero vector is a legal output (e.g. the shape
/// outside the frustum in every perturbation).
Vec6 estimate_jacobian(const Mask& observed, const Pose6& pose,
                       const ShapePrimitive& shape, const CameraModel& camera,
                       std::span<const std::pair<ShapePrimitive, Pose6>> occluders,
                       const Vec6& steps);

/// Gradient ascent on vision_score from the prior pose with a backtracking
/// line search. Stops at stationarity (no improving step, or improvement
/// below 1e-5) or after 100 iterations; accepted iterates have
/// non-decreasing score and the best visited pose is returned.
///
/// Throws LostTrackError when the observed mask has no foreground, when no
/// pose with score above -1 exists at the prior, or when the final score
/// is negative or the final render is empty against a nonempty mask.
VisionPoseEstimate estimate_pose_vision(
    const Mask& observed, const Pose6& prior, const ShapePrimitive& shape,
    const CameraModel& camera,
    std::span<const std::pair<ShapePrimitive, Pose6>> occluders = {});

struct BruteForceResult {
  Pose6 pose;
  double score = -1.0;
  std::size_t index = 0;  // position in the search grid
};

/// Odometer-order pose lattice: steps_per_axis samples per axis spanning
/// center +/- half_range, last axis varying fastest. Axes with zero half
/// range collapse to the center value.
std::vector<Pose6> make_pose_lattice(const Pose6& center, const Vec6& half_range,
                                     int steps_per_axis);

/// Exhaustive argmax of vision_score over the grid; on ties the earliest
/// grid index wins. Throws std::invalid_argument on an empty grid.
BruteForceResult brute_force_pose_search(const Mask& observed,
                                         std::span<const Pose6> grid,
                                         const ShapePrimitive& shape,
                                         const CameraModel& camera);

}  // namespace occlufuse
