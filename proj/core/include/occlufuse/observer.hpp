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
#include <cmath>
#include <numbers>
#include <span>

#include <Eigen/Dense>

#include "occlufuse/geometry.hpp"
#include "occlufuse/mask.hpp"

namespace occlufuse {

/// Pose-tracking observer state: the running estimate, its covariance, and
/// the memory of the second-order output filter.
struct ObserverState {
  Pose6 estimate;
  Mat6 covariance = 1e-2 * Mat6::Identity();
  double time = 0.0;  // s, advanced by predict

  // Output low-pass filter memory: two direct-form-II-transposed states per
  // pose dimension, plus the last unwrapped input for attitude continuity.
  Eigen::Matrix<double, 2, 6> lpf_state = Eigen::Matrix<double, 2, 6>::Zero();
  Vec6 lpf_input = Vec6::Zero();
  bool lpf_primed = false;
};

/// Fusion tuning: process noise, the occlusion-scaled vision weight, the
/// distance curve for haptic covariance, and the output filter corner.
struct NoiseConfig {
  /// Process covariance rate, (m^2, rad^2)/s. The motion model is a random
  /// walk (no dynamics), so this absorbs expected object velocity.
  Mat6 process = (Vec6() << 4.0, 4.0, 4.0, 2.0, 2.0, 2.0).finished().asDiagonal();

  /// Weight scaled by the occlusion fraction to form the vision covariance.
  /// The position scale is deliberately large: at full occlusion the
  /// silhouette fit is systematically biased (a shrunken or retreated
  /// render can match an eroded blob), so fraction 1.0 must make vision
  /// nearly uninformative next to an in-range contact reading, while the
  /// few-percent fractions of a clear view still leave it a useful assist.
  Mat6 vision_weight = (Vec6() << 500.0, 500.0, 500.0, 16.0 * M_PI,
                        16.0 * M_PI, 16.0 * M_PI)
                           .finished()
                           .asDiagonal();

  /// Haptic fusion weight at contact distance. A weight, not the solver's
  /// physical accuracy: it sits well below the vision position weight at
  /// any occlusion level, so an in-range contact reading leads the fused
  /// position while vision supplies attitude (contact never observes yaw)
  /// and takes over completely once contact drops out of range. It also
  /// keeps the explicit-Euler gain integration stable at millisecond
  /// steps.
  double haptic_sigma2_near = 4.0;      // (m, rad)^2
  double haptic_growth_exponent = 4.0;  // curve steepness toward max range
  double haptic_curve_range = 0.20;     // m, where the modality cuts off

  /// Which attitude axes the haptic solver can observe for the tracked
  /// shape; unobservable axes always carry the sentinel. Default matches a
  /// capsule with its symmetry axis along local z.
  std::array<bool, 3> haptic_attitude_observable = {true, true, false};

  double omega_n = 120.0 * M_PI;             // rad/s, filter natural frequency
  double zeta = 1.0 / std::numbers::sqrt2;   // filter damping

  bool valid() const;
};

/// One frame's measurements. An invalid modality must carry (and is in any
/// case treated as carrying) the inflation-sentinel covariance, so the
/// fusion math never branches on validity.
struct MeasurementPair {
  Pose6 vision;
  bool vision_valid = false;
  Mat6 vision_covariance = kUnobservableVariance * Mat6::Identity();
  Pose6 haptic;
  bool haptic_valid = false;
  Mat6 haptic_covariance = kUnobservableVariance * Mat6::Identity();
};

/// Random-walk propagation: estimate moves by u*dt (u is a known rate,
/// zero in normal tracking), covariance grows by process*dt, time advances.
/// Requires dt > 0.
ObserverState predict(const ObserverState& state, const Vec6& u, double dt,
                      const Mat6& process);

/// One explicit-Euler step of the covariance flow
///   dP/dt = A P + P A^T + Q - P C^T R^-1 C P,
/// followed by symmetrization and an eigenvalue floor at zero. Throws
/// NumericalError when R is singular or when any entry of the stepped P
/// exceeds 1e9 in magnitude (dt too large for the data).
Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& C, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R, double dt);

/// Observer gain K = P C^T R^-1. Throws NumericalError when R is singular.
Eigen::MatrixXd gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& C,
                     const Eigen::MatrixXd& R);

/// Measurement step: stacks both modalities as a 12-row direct pose
/// observation (C = [I; I]), forms the innovation with wrapped attitude
/// differences, and integrates estimate += K * innovation * dt together
/// with the matching covariance flow (process noise is predict's job, so
/// the Riccati step here runs with Q = 0). Time does not advance; pair
/// each update with one predict. Throws std::invalid_argument when both
/// modalities are invalid — skipping the update is the caller's explicit
/// choice for prediction-only frames.
ObserverState update(const ObserverState& state, const MeasurementPair& meas,
                     double dt);

/// Vision covariance from mask disagreement: the fraction of predicted
/// target pixels missing from the observed mask, times the vision weight.
/// `predicted` is the unoccluded render at the current estimate, `observed`
/// the segmentation actually seen. Throws NumericalError when the predicted
/// mask has no target pixels (vision carries no information).
Mat6 compute_R_v(const Mask& predicted, const Mask& observed, const Mat6& W_v);

/// Same covariance from an already-computed occlusion fraction in [0, 1].
Mat6 compute_R_v(double occlusion_fraction, const Mat6& W_v);

/// Haptic covariance from proximity: with d the distance from the estimate
/// position to the nearest sensor, observable axes carry
///   sigma2_near * (1 + (d / range)^exponent)
/// for d <= range and the inflation sentinel beyond; attitude axes the
/// config marks unobservable always carry the sentinel. Requires at least
/// one sensor pose.
Mat6 compute_R_c(const Pose6& estimate, std::span<const RigidTransform> sensors,
                 const NoiseConfig& config);

/// Second-order output low-pass (bilinear-transformed canonical filter
/// with natural frequency omega_n and damping zeta), applied per pose
/// dimension; attitude is filtered on unwrapped angles and re-wrapped. The
/// first call primes the filter to the input so a constant stream passes
/// through unchanged. Requires dt > 0; throws NumericalError when
/// omega_n * dt >= 1 (discretization too coarse).
Pose6 lowpass(ObserverState& state, const Pose6& raw_pose, double dt,
              const NoiseConfig& config);

}  // namespace occlufuse
