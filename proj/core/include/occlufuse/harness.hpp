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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "occlufuse/geometry.hpp"
#include "occlufuse/haptic.hpp"
#include "occlufuse/mask.hpp"
#include "occlufuse/observer.hpp"
#include "occlufuse/sensor.hpp"

namespace occlufuse {

/// Timed pose knot for a trajectory spline.
struct PoseWaypoint {
  double t = 0.0;  // s
  Pose6 pose;
};

/// Piecewise-cubic pose trajectory: Catmull-Rom tangents on non-uniform
/// knots, clamped to the end poses outside the waypoint range. Attitude
/// components are interpolated as continuous (unwrapped) angles, so run
/// normalize_trajectory after building waypoints from wrapped values.
struct Trajectory {
  std::vector<PoseWaypoint> waypoints;

  bool valid() const;  // >= 1 waypoint, strictly increasing times
  Pose6 sample(double t) const;

  static Trajectory constant(const Pose6& pose) { return {{{0.0, pose}}}; }
};

/// Sorts waypoints by time and unwraps attitude components so consecutive
/// knots differ by less than pi per axis.
void normalize_trajectory(Trajectory& trajectory);

/// Time window during which the observed mask loses `fraction` of its
/// target pixels (synthetic segmentation degradation).
struct OcclusionWindow {
  double start = 0.0, end = 0.0;  // s, active on [start, end)
  double fraction = 0.0;          // in [0, 1)
};

/// Scene object that physically blocks the camera's view of the target
/// during its window.
struct SceneOccluder {
  ShapePrimitive shape;
  Pose6 pose;
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();  // s, [start, end)
};

struct OcclusionSchedule {
  std::vector<OcclusionWindow> windows;     // mask degradation
  std::vector<SceneOccluder> occluders;     // rendered blockers
  double pixel_noise = 0.0;                 // label flip probability

  /// Largest degradation fraction among windows active at t (0 outside).
  double fraction_at(double t) const;
  /// Occluders active at t.
  std::vector<std::pair<ShapePrimitive, Pose6>> occluders_at(double t) const;
};

/// One reproducible tracking experiment: what moves, what senses it, how
/// the view degrades, and how the fusion is tuned.
struct Scenario {
  std::string name = "scenario";
  double duration = 10.0;    // s
  double frame_rate = 30.0;  // Hz, camera frames; observer substeps at ~1 ms
  std::uint64_t seed = 0;

  ShapePrimitive target = ShapePrimitive::capsule(0.045, 0.30);
  Trajectory trajectory;
  CameraModel camera;

  KinematicChain rig;
  std::vector<double> joint_angles;  // rad, held fixed over the run
  std::vector<SensorModel> sensors;  // one shared model, or one per mount

  OcclusionSchedule occlusion;
  NoiseConfig noise;

  /// Floor added to the vision reliability fraction before scaling the
  /// vision weight, so an unoccluded view still carries a finite
  /// covariance.
  double vision_base_fraction = 0.02;

  std::optional<Pose6> initial_estimate;  // default: truth at t = 0
  Mat6 initial_covariance = 1e-2 * Mat6::Identity();

  bool valid() const;
  const SensorModel& sensor_for_mount(std::size_t mount) const;
};

/// Everything recorded about one camera frame: the truth, both raw
/// estimator outputs, the three observer streams (fused, vision-only,
/// haptic-only — same measurements, different validity masks), and the
/// error norms the result table aggregates.
struct FrameRecord {
  double t = 0.0;
  Pose6 truth;

  Pose6 vision_estimate;       // raw silhouette match (prior on failure)
  bool vision_valid = false;
  double r_v_scalar = 1.0;     // reliability fraction driving R_v

  Pose6 haptic_estimate;       // raw surface fit (prior on failure)
  bool haptic_valid = false;
  bool haptic_in_range = false;

  Pose6 fused;        // fused observer stream, low-pass filtered
  Pose6 vision_only;  // haptic forced invalid
  Pose6 haptic_only;  // vision forced invalid

  double occlusion = 0.0;        // measured fraction, full vs observed mask
  double camera_distance = 0.0;  // m, truth position to camera center

  double fused_pos_err = 0.0, fused_att_err = 0.0;    // m, rad
  double vision_pos_err = 0.0, vision_att_err = 0.0;  // vision-only stream
  double haptic_pos_err = 0.0, haptic_att_err = 0.0;  // haptic-only stream
};

/// Runs the full per-frame pipeline: spline truth, render + degrade the
/// observed mask, silhouette and surface-fit estimates (prior = the fused
/// observer's current estimate), covariance models, and three observer
/// streams advanced with ~1 ms substeps between frames. Estimator
/// lost-track conditions are recorded as invalid frames, never aborts.
/// Deterministic for a fixed scenario + seed. Throws ConfigError on an
/// invalid scenario.
std::vector<FrameRecord> run_scenario(const Scenario& scenario);

/// Band edges used for result aggregation: distances 0-3, 3-6, 6-10 m
/// (frames beyond 10 m stay in the last band) and occlusion thirds.
int distance_band(double distance_m);       // 0, 1, 2
int occlusion_band(double fraction);        // 0, 1, 2
std::string distance_band_name(int band);   // "0-3m", ...
std::string occlusion_band_name(int band);  // "0-33%", ...

struct ResultCell {
  int distance = 0;       // band index
  int occlusion = 0;      // band index
  bool in_range = false;  // haptic in range for these frames
  int frames = 0;
  double fused_pos_rmse = 0.0, fused_att_rmse = 0.0;
  double vision_pos_rmse = 0.0, vision_att_rmse = 0.0;
  double haptic_pos_rmse = 0.0, haptic_att_rmse = 0.0;
};

/// RMSE per method over frames grouped by (distance band, occlusion band,
/// haptic in/out of range). Only populated cells appear. Throws
/// std::invalid_argument on empty input.
struct ResultTable {
  std::vector<ResultCell> cells;

  const ResultCell* find(int distance, int occlusion, bool in_range) const;
};

ResultTable aggregate(std::span<const FrameRecord> records);

/// One (distance band, occlusion band, in/out of range) grid cell of a
/// sweep.
struct SweepCellSpec {
  int distance = 0;
  int occlusion = 0;
  bool in_range = true;
};

struct SweepConfig {
  std::vector<SweepCellSpec> cells;  // default: every populated grid cell
  int seeds_per_cell = 5;
  std::uint64_t master_seed = 0;
  double duration = 6.0;      // s per scenario
  double frame_rate = 30.0;   // Hz
  int jobs = 1;               // worker threads across scenarios

  /// Both range sections of the published table: every distance band
  /// crossed with every occlusion band, except the longest-distance
  /// heaviest-occlusion cell the table layout omits.
  static SweepConfig defaults();
};

struct SweepRun {
  SweepCellSpec cell;
  int repeat = 0;          // seed index within the cell
  std::uint64_t seed = 0;  // derived scenario seed
  bool failed = false;
  std::string error;
  std::vector<FrameRecord> records;
};

struct SweepResult {
  ResultTable table;
  std::vector<SweepRun> runs;  // fixed (cell, repeat) order
  int failures = 0;
};

/// Deterministic scenario for one grid cell: the target tracks a gentle
/// vertical oscillation at the band's camera distance, the degradation
/// schedule stays inside the occlusion band, and the sensor rig is posed
/// in or out of reach per the cell.
Scenario make_cell_scenario(const SweepCellSpec& cell, std::uint64_t seed,
                            double duration, double frame_rate);

/// Runs every (cell, seed) scenario — in parallel when jobs > 1, with
/// results identical to the sequential order — and aggregates all
/// successful runs. Per-run failures are captured, not thrown.
SweepResult sweep(const SweepConfig& config);

/// CSV serialization of frame records: stable header, fixed column order,
/// floats at 9 significant digits — byte-identical for identical records.
std::string records_csv(std::span<const FrameRecord> records);

/// Atomic file write (temp + rename). Throws ConfigError on IO failure.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace occlufuse
