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

// Library-internal rasterizer entry points. Not installed: the scoring hot
// path reuses buffers across calls and needs to know which pixel rectangle
// a raster pass may have written, which the public mask API deliberately
// does not expose.

#ifndef OCCLUFUSE_SRC_RASTER_INTERNAL_HPP_
#define OCCLUFUSE_SRC_RASTER_INTERNAL_HPP_

#include <algorithm>
#include <cstdint>
#include <vector>

#include "occlufuse/geometry.hpp"
#include "occlufuse/mask.hpp"

namespace occlufuse::detail {

/// Inclusive pixel rectangle; default-constructed it is empty.
struct PixelRect {
  int r0 = 0, c0 = 0;
  int r1 = -1, c1 = -1;

  bool empty() const { return r1 < r0 || c1 < c0; }

  void merge(int row0, int col0, int row1, int col1) {
    if (empty()) {
      r0 = row0;
      c0 = col0;
      r1 = row1;
      c1 = col1;
      return;
    }
    r0 = std::min(r0, row0);
    c0 = std::min(c0, col0);
    r1 = std::max(r1, row1);
    c1 = std::max(c1, col1);
  }
};

/// Z-buffered rasterization of one mesh into caller-owned buffers. When
/// `touched` is non-null it is extended by a conservative superset of every
/// pixel the pass may have written (screen-clipped triangle bounding boxes).
void raster_mesh(const TriangleMesh& mesh, const RigidTransform& local_to_cam,
                 const CameraModel& cam, std::uint8_t label,
                 std::vector<double>& inv_z, Mask& out,
                 PixelRect* touched = nullptr);

}  // namespace occlufuse::detail

#endif  // OCCLUFUSE_SRC_RASTER_INTERNAL_HPP_
