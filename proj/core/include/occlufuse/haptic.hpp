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

#include <span>
#include <vector>

#include "occlufuse/geometry.hpp"
#include "occlufuse/sensor.hpp"

namespace occlufuse {

/// Serial chain of revolute joints carrying the proximity sensors. Each
/// link is a fixed offset followed by a rotation about a unit axis; sensors
/// mount onto links with a fixed offset of their own.
struct KinematicChain {
  struct Link {
    Vec3 axis = Vec3::UnitZ();  // revolute axis in the joint frame
    RigidTransform offset;      // previous joint frame -> this joint frame
  };
  struct Mount {
    int link = 0;           // index of the carrying link
    RigidTransform offset;  // link frame -> sensor frame
  };

  RigidTransform base;  // chain base frame in the world
  std::vector<Link> links;
  std::vector<Mount> mounts;

  /// Axes unit-normalizable, mounts referencing existing links, base a
  /// proper rigid transform.
  bool valid() const;
};

/// World pose of every mounted sensor at joint angles theta (radians), in
/// mount order. theta.size() must equal links.size(); throws
/// std::invalid_argument on size mismatch, non-finite angles, or an invalid
/// chain.
std::vector<RigidTransform> forward_kinematics(const KinematicChain& chain,
                                               std::span<const double> theta);

/// One proximity sensor's contribution to a pose solve.
struct SensorReading {
  RigidTransform sensor_pose;  // sensor frame in the world
  RelativePointMeasurement measurement;
};

enum class HapticMode {
  Full6DoF,      // solve position and attitude (needs >= 3 valid readings)
  PositionOnly,  // solve position, hold attitude at the prior (needs >= 1)
};

struct HapticPoseEstimate {
  Pose6 pose;
  double residual_rms = 0.0;  // m, rms distance error per measurement
  Mat6 covariance = Mat6::Zero();
  int n_measurements = 0;  // valid readings used
  int iterations = 0;
};

/// Fits the shape's pose to the measured nearest-surface points by damped
/// Gauss-Newton, starting from the prior. Invalid readings are skipped.
///
/// The estimate minimizes the sum over sensors of
///   || nearest_surface_point(shape, pose, sensor_origin)
///      - (sensor_origin + measured offset) ||^2.
///
/// Covariance is (J^T J)^-1 scaled by the residual variance, floored at the
/// mean squared measurement noise so noise-free fits still report the
/// geometry-driven uncertainty. Structurally unobservable axes (any
/// rotation of a sphere, spin of a capsule or cylinder) stay at the prior
/// and carry kUnobservableVariance.
///
/// Throws std::invalid_argument when fewer valid readings than the mode
/// needs, NumericalError on non-convergence after 50 iterations or when
/// the observable part of J^T J has condition number above 1e12.
HapticPoseEstimate estimate_pose_haptic(std::span<const SensorReading> readings,
                                        const ShapePrimitive& shape,
                                        const Pose6& prior,
                                        HapticMode mode = HapticMode::Full6DoF);

}  // namespace occlufuse
