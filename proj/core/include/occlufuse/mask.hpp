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

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "occlufuse/geometry.hpp"

namespace occlufuse {

/// Segmentation label grid. 0 is background; positive labels identify
/// objects (the rasterizer emits 1 for the target).
struct Mask {
  int height = 0, width = 0;
  std::vector<std::uint8_t> labels;  // row-major, labels[r * width + c]

  static Mask zeros(int height, int width) {
    return Mask{height, width,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(height) * width, 0)};
  }

  std::uint8_t& at(int r, int c) {
    return labels[static_cast<std::size_t>(r) * width + c];
  }
  std::uint8_t at(int r, int c) const {
    return labels[static_cast<std::size_t>(r) * width + c];
  }

  bool valid() const {
    return height > 0 && width > 0 &&
           labels.size() == static_cast<std::size_t>(height) * width;
  }

  /// Pixels carrying any object label.
  int count_nonzero() const;
};

/// Renders the target's segmentation mask with a deterministic z-buffered
/// triangle rasterizer (pixel-center sampling, no anti-aliasing). Pixels
/// where the target is the nearest surface get label 1; occluder-covered
/// and background pixels get 0. An object fully outside the frustum yields
/// an all-zero mask. Throws std::invalid_argument on an invalid camera.
Mask render_mask(const ShapePrimitive& shape, const Pose6& pose,
                 const CameraModel& camera,
                 std::span<const std::pair<ShapePrimitive, Pose6>> occluders = {});

/// A tessellated body at a fixed pose, for hot paths that render the same
/// geometry many times.
struct PosedMesh {
  TriangleMesh mesh;
  Pose6 pose;
};

/// Render of a pre-tessellated target mesh, optionally blocked by
/// pre-tessellated occluders. Avoids the per-call tessellation cost on hot
/// paths that re-render one shape at many candidate poses.
Mask render_mask(const TriangleMesh& target_mesh, const Pose6& pose,
                 const CameraModel& camera,
                 std::span<const PosedMesh> occluders = {});

/// Fraction of the target's pixels an occluder hides:
/// (count(full) - count(visible)) / count(full), clamped to [0, 1].
/// `full` is the unoccluded render, `visible` the occluded one. Throws
/// std::invalid_argument on dimension mismatch, NumericalError when the
/// unoccluded mask has no target pixels.
double occlusion_fraction(const Mask& full, const Mask& visible);

/// Synthetic segmentation degradation: removes one contiguous region of
/// target pixels (grown breadth-first from a seeded random boundary pixel)
/// sized to occlusion_target within +/-2%, then flips each remaining pixel
/// independently with probability pixel_noise. Deterministic per seed.
/// Requires occlusion_target in [0,1), pixel_noise in [0,0.1], and at least
/// one target pixel; throws std::invalid_argument otherwise.
Mask degrade_mask(const Mask& truth, double occlusion_target,
                  double pixel_noise, std::uint64_t rng_seed);

/// Binary PGM (P5) export, one label byte per pixel. Throws ConfigError on
/// IO failure.
void write_pgm(const Mask& mask, const std::string& path);

}  // namespace occlufuse
