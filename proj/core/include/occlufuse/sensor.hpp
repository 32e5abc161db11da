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
#include <vector>

#include "occlufuse/geometry.hpp"

namespace occlufuse {

/// Electric-perception sensor: voltage falls off with distance as
/// v(d) = a1 / (1 + a2 * d^2) + a3.
///
/// Position measurements carry gaussian noise whose std grows with the
/// signal attenuation factor: std(d) = sigma0 * (1 + noise_curvature * d^2).
/// The curvature is a fixed reference, not the per-object a2, so noise
/// growth stays comparable across object classes.
struct SensorModel {
  double a1 = 2.0;               // V
  double a2 = 400.0;             // 1/m^2
  double a3 = 0.5;               // V
  double noise_variance = 6.2e-6;  // V^2
  double range = 0.15;           // m, detection radius
  RigidTransform mount;          // sensor frame in parent frame
  double sigma0 = 2.0e-4;        // m, position noise at contact
  double noise_curvature = 400.0;  // 1/m^2
  std::string object_class = "test";

  bool valid() const {
    return a1 > 0 && a2 > 0 && a3 >= 0 && noise_variance >= 0 && range > 0 &&
           sigma0 >= 0 && noise_curvature >= 0;
  }
};

/// Estimated nearest surface point relative to the sensor origin.
struct RelativePointMeasurement {
  Vec3 offset = Vec3::Zero();  // m, world-frame nearest point minus sensor origin
  bool valid = false;          // distance within the sensor's range
  double noise_std = 0.0;      // m, std of the injected gaussian noise
};

/// Voltage at distance d (meters). Throws std::domain_error for d < 0.
double response(const SensorModel& model, double d);

/// Unique d >= 0 with response(model, d) = v. Throws std::domain_error when
/// v <= a3 (beyond resolvable range) or v > a1 + a3.
double invert_response(const SensorModel& model, double v);

/// 10*log10((max - min)^2 / (2 * noise_variance)) over a voltage trace.
/// Throws std::invalid_argument on an empty trace or zero dynamic range.
double snr(const SensorModel& model, std::span<const double> trace);

/// Detection SNR for an object at distance d: dynamic range between the
/// object's response and the empty-field baseline a3.
double snr_at_distance(const SensorModel& model, double d);

/// Position noise std at distance d.
double measurement_noise_std(const SensorModel& model, double d);

struct FitResult {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double residual_rms = 0.0;  // V
  int iterations = 0;
};

/// Least-squares fit of the response curve to (distance, voltage) samples.
/// Needs >= 4 samples spanning at least a 2:1 distance ratio. Throws
/// NumericalError on rank deficiency (all d equal) or non-convergence.
FitResult fit_params(std::span<const std::pair<double, double>> samples);

/// Nearest-surface-point measurement of a posed target. Deterministic for a
/// fixed seed. Out-of-range targets yield valid = false, never an error.
RelativePointMeasurement measure(const SensorModel& model,
                                 const RigidTransform& sensor_pose_world,
                                 const ShapePrimitive& target,
                                 const Pose6& target_pose, std::uint64_t seed);

/// Built-in calibration table. Parameters are synthetic, fitted to the
/// qualitative curve shapes; the "forearm" class reproduces the ~15 cm
/// 1 dB detection limit.
std::vector<SensorModel> default_calibration();

/// Finds a class in the built-in table; throws ConfigError if unknown.
SensorModel calibration_for_class(const std::string& object_class);

/// JSON calibration file IO. A file holds either one entry or a
/// {"classes": [...]} list; fields use unit-suffixed keys.
std::vector<SensorModel> load_calibration(const std::string& path);
void save_calibration(const std::string& path, std::span<const SensorModel> models);

}  // namespace occlufuse
