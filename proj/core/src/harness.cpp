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

#include "occlufuse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "occlufuse/errors.hpp"
#include "occlufuse/rng.hpp"
#include "occlufuse/vision.hpp"

namespace occlufuse {

bool Trajectory::valid() const {
  if (waypoints.empty()) return false;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!std::isfinite(waypoints[i].t) || !waypoints[i].pose.finite())
      return false;
    if (i > 0 && !(waypoints[i].t > waypoints[i - 1].t)) return false;
  }
  return true;
}

Pose6 Trajectory::sample(double t) const {
  if (waypoints.empty())
    throw std::invalid_argument("Trajectory::sample: no waypoints");
  const std::size_t n = waypoints.size();
  if (n == 1 || t <= waypoints.front().t)
    return waypoints.front().pose.wrapped();
  if (t >= waypoints.back().t) return waypoints.back().pose.wrapped();

  std::size_t i = 0;
  while (waypoints[i + 1].t <= t) ++i;  // t < back().t keeps i + 1 < n

  const double t0 = waypoints[i].t, t1 = waypoints[i + 1].t;
  const double h = t1 - t0;
  const Vec6 p0 = waypoints[i].pose.vector();
  const Vec6 p1 = waypoints[i + 1].pose.vector();
  // Catmull-Rom tangents on non-uniform knots, one-sided at the ends.
  const Vec6 m0 =
      i == 0 ? Vec6((p1 - p0) / h)
             : Vec6((p1 - waypoints[i - 1].pose.vector()) /
                    (t1 - waypoints[i - 1].t));
  const Vec6 m1 =
      i + 2 >= n ? Vec6((p1 - p0) / h)
                 : Vec6((waypoints[i + 2].pose.vector() - p0) /
                        (waypoints[i + 2].t - t0));

  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  const Vec6 v = h00 * p0 + (h10 * h) * m0 + h01 * p1 + (h11 * h) * m1;
  return Pose6::from_vector(v).wrapped();
}

void normalize_trajectory(Trajectory& trajectory) {
  std::stable_sort(trajectory.waypoints.begin(), trajectory.waypoints.end(),
                   [](const PoseWaypoint& a, const PoseWaypoint& b) {
                     return a.t < b.t;
                   });
  for (std::size_t k = 1; k < trajectory.waypoints.size(); ++k) {
    Vec3& att = trajectory.waypoints[k].pose.attitude;
    const Vec3& prev = trajectory.waypoints[k - 1].pose.attitude;
    for (int a = 0; a < 3; ++a)
      att[a] = prev[a] + wrap_angle(att[a] - prev[a]);
  }
}

double OcclusionSchedule::fraction_at(double t) const {
  double fraction = 0.0;
  for (const OcclusionWindow& w : windows)
    if (t >= w.start && t < w.end) fraction = std::max(fraction, w.fraction);
  return fraction;
}

std::vector<std::pair<ShapePrimitive, Pose6>> OcclusionSchedule::occluders_at(
    double t) const {
  std::vector<std::pair<ShapePrimitive, Pose6>> active;
  for (const SceneOccluder& o : occluders)
    if (t >= o.start && t < o.end) active.emplace_back(o.shape, o.pose);
  return active;
}

bool Scenario::valid() const {
  if (!(duration > 0) || !(frame_rate > 0)) return false;
  if (!target.valid() || !trajectory.valid() || !camera.valid() ||
      !noise.valid())
    return false;
  if (!(vision_base_fraction >= 0.0 && vision_base_fraction <= 1.0))
    return false;
  for (const OcclusionWindow& w : occlusion.windows)
    if (!std::isfinite(w.start) || !(w.start <= w.end) ||
        !(w.fraction >= 0.0 && w.fraction < 1.0))
      return false;
  if (!(occlusion.pixel_noise >= 0.0 && occlusion.pixel_noise <= 0.1))
    return false;
  for (const SceneOccluder& o : occlusion.occluders)
    if (!o.shape.valid() || !o.pose.finite()) return false;
  if (!rig.mounts.empty()) {
    if (!rig.valid() || joint_angles.size() != rig.links.size()) return false;
    if (sensors.empty() ||
        (sensors.size() != 1 && sensors.size() != rig.mounts.size()))
      return false;
    for (const SensorModel& s : sensors)
      if (!s.valid()) return false;
  }
  if (initial_estimate && !initial_estimate->finite()) return false;
  if (!initial_covariance.allFinite()) return false;
  return true;
}

const SensorModel& Scenario::sensor_for_mount(std::size_t mount) const {
  if (sensors.empty())
    throw ConfigError("scenario '" + name + "' has no sensor models");
  return sensors.size() == 1 ? sensors.front() : sensors.at(mount);
}

namespace {

double position_error(const Pose6& pose, const Pose6& truth) {
  return pose_error(pose, truth).head<3>().norm();
}

double attitude_error(const Pose6& pose, const Pose6& truth) {
  return pose_error(pose, truth).tail<3>().norm();
}

}  // namespace

std::vector<FrameRecord> run_scenario(const Scenario& scenario) {
  if (!scenario.valid())
    throw ConfigError("run_scenario: invalid scenario '" + scenario.name +
                      "'");

  const double frame_dt = 1.0 / scenario.frame_rate;
  const int n_frames = std::max(
      1, static_cast<int>(std::llround(scenario.duration *
                                       scenario.frame_rate)));
  // The observer integrates with explicit Euler steps, so frames are split
  // into ~1 ms substeps with the frame's measurements held constant.
  const int n_sub =
      std::max(1, static_cast<int>(std::llround(frame_dt / 0.001)));
  const double dt_sub = frame_dt / n_sub;

  // The rig holds still over a run, so sensor poses are computed once.
  std::vector<RigidTransform> sensors_world;
  if (!scenario.rig.mounts.empty())
    sensors_world = forward_kinematics(scenario.rig, scenario.joint_angles);

  const TriangleMesh target_mesh = tessellate(scenario.target);

  const Pose6 x0 = scenario.initial_estimate
                       ? *scenario.initial_estimate
                       : scenario.trajectory.sample(0.0);
  // Three streams over identical measurements: the fused estimate plus two
  // ablations that force one modality invalid. When a modality never
  // produces a valid estimate, the fused stream performs the exact same
  // arithmetic as the corresponding ablation.
  ObserverState fused, vision_state, haptic_state;
  for (ObserverState* st : {&fused, &vision_state, &haptic_state}) {
    st->estimate = x0;
    st->covariance = scenario.initial_covariance;
  }
  Pose6 fused_out = x0, vision_out = x0, haptic_out = x0;

  std::vector<FrameRecord> records;
  records.reserve(static_cast<std::size_t>(n_frames));

  for (int k = 0; k < n_frames; ++k) {
    const double t = k * frame_dt;
    FrameRecord rec;
    rec.t = t;
    rec.truth = scenario.trajectory.sample(t);
    rec.camera_distance =
        (rec.truth.position - scenario.camera.position_world()).norm();

    // Observed segmentation: render through the active blockers, then
    // apply the scheduled degradation and pixel noise.
    const auto occluder_shapes = scenario.occlusion.occluders_at(t);
    const Mask full = render_mask(target_mesh, rec.truth, scenario.camera);
    Mask observed = occluder_shapes.empty()
                        ? full
                        : render_mask(scenario.target, rec.truth,
                                      scenario.camera, occluder_shapes);
    const double degrade = scenario.occlusion.fraction_at(t);
    if ((degrade > 0.0 || scenario.occlusion.pixel_noise > 0.0) &&
        observed.count_nonzero() > 0)
      observed = degrade_mask(
          observed, degrade, scenario.occlusion.pixel_noise,
          Rng::derive(scenario.seed, 1, static_cast<std::uint64_t>(k)));
    rec.occlusion = full.count_nonzero() == 0
                        ? 1.0
                        : occlusion_fraction(full, observed);

    // Sensor readings are shared world state: every stream sees the same
    // physics, only the estimators differ.
    std::vector<SensorReading> readings;
    int n_valid = 0;
    if (!sensors_world.empty()) {
      readings.reserve(sensors_world.size());
      for (std::size_t i = 0; i < sensors_world.size(); ++i) {
        SensorReading reading;
        reading.sensor_pose = sensors_world[i];
        reading.measurement = measure(
            scenario.sensor_for_mount(i), sensors_world[i], scenario.target,
            rec.truth,
            Rng::derive(scenario.seed, 1000 + i,
                        static_cast<std::uint64_t>(k)));
        n_valid += reading.measurement.valid ? 1 : 0;
        readings.push_back(reading);
      }
    }
    rec.haptic_in_range = n_valid > 0;

    // Reliability level for the vision covariance: compare the silhouette
    // the motion model expects — rendered unobstructed at the prior —
    // against what the camera reports, counting disagreement relative to
    // the larger of the two. For a tracking prior this equals the missing
    // (occluded) fraction; for a drifted prior the deficit itself raises
    // the fraction. Rendering at the post-fit pose instead would let a
    // drifted fit shrink its silhouette onto the visible blob and claim a
    // clear view, and an erosion-only fraction would do the same for a
    // prior whose render has shrunk below the observed blob.
    const auto vision_part = [&](const Pose6& prior, MeasurementPair& m,
                                 double* fraction_out) {
      m.vision = prior;
      try {
        const Mask expected =
            render_mask(target_mesh, prior, scenario.camera);
        const long n_expected = expected.count_nonzero();
        if (n_expected == 0)
          throw NumericalError("vision reliability: prior renders empty");
        long n_observed = 0, n_common = 0;
        for (std::size_t px = 0; px < observed.labels.size(); ++px) {
          const bool obs = observed.labels[px] != 0;
          n_observed += obs ? 1 : 0;
          n_common += (obs && expected.labels[px] != 0) ? 1 : 0;
        }
        const double fraction =
            1.0 - static_cast<double>(n_common) /
                      static_cast<double>(std::max(n_expected, n_observed));
        const VisionPoseEstimate ve =
            estimate_pose_vision(observed, prior, scenario.target,
                                 scenario.camera, occluder_shapes);
        m.vision = ve.pose;
        m.vision_valid = true;
        m.vision_covariance = compute_R_v(
            std::min(fraction + scenario.vision_base_fraction, 1.0),
            scenario.noise.vision_weight);
        if (fraction_out) *fraction_out = fraction;
      } catch (const NumericalError&) {
        // Lost track, or the prior's render left the frustum: the
        // modality sits this frame out.
      }
    };

    const auto haptic_part = [&](const Pose6& prior, MeasurementPair& m) {
      m.haptic = prior;
      if (n_valid < 1) return;
      const HapticMode mode =
          n_valid >= 3 ? HapticMode::Full6DoF : HapticMode::PositionOnly;
      try {
        const HapticPoseEstimate he =
            estimate_pose_haptic(readings, scenario.target, prior, mode);
        m.haptic = he.pose;
        m.haptic_valid = true;
        Mat6 R_c = compute_R_c(prior, sensors_world, scenario.noise);
        // A position-only solve echoes the prior attitude back; it must
        // not be fed to the fusion as an attitude measurement.
        if (mode == HapticMode::PositionOnly)
          for (int a = 3; a < 6; ++a) R_c(a, a) = kUnobservableVariance;
        m.haptic_covariance = R_c;
      } catch (const NumericalError&) {
        // Degenerate contact geometry this frame.
      }
    };

    // Each stream runs the estimators from its own prior: the ablation
    // columns are what each pipeline would do alone, not a re-weighting
    // of the fused pipeline's outputs. An invalid modality keeps the
    // stream's prior as its (sentinel-weighted) placeholder value, so a
    // stream whose extra modality never fires performs arithmetic
    // identical to its ablation twin.
    MeasurementPair fused_meas, vision_meas, haptic_meas;
    vision_part(fused.estimate, fused_meas, &rec.r_v_scalar);
    haptic_part(fused.estimate, fused_meas);
    vision_part(vision_state.estimate, vision_meas, nullptr);
    vision_meas.haptic = vision_state.estimate;
    haptic_part(haptic_state.estimate, haptic_meas);
    haptic_meas.vision = haptic_state.estimate;

    rec.vision_estimate = fused_meas.vision;
    rec.vision_valid = fused_meas.vision_valid;
    rec.haptic_estimate = fused_meas.haptic;
    rec.haptic_valid = fused_meas.haptic_valid;

    // The record captures the streams at t_k, i.e. with measurements up to
    // frame k - 1 absorbed; frame k's measurements act over the interval
    // [t_k, t_{k+1}) integrated below.
    rec.fused = fused_out;
    rec.vision_only = vision_out;
    rec.haptic_only = haptic_out;
    rec.fused_pos_err = position_error(rec.fused, rec.truth);
    rec.fused_att_err = attitude_error(rec.fused, rec.truth);
    rec.vision_pos_err = position_error(rec.vision_only, rec.truth);
    rec.vision_att_err = attitude_error(rec.vision_only, rec.truth);
    rec.haptic_pos_err = position_error(rec.haptic_only, rec.truth);
    rec.haptic_att_err = attitude_error(rec.haptic_only, rec.truth);
    records.push_back(rec);

    if (k + 1 == n_frames) break;

    const auto advance = [&](ObserverState& st, const MeasurementPair& m,
                             Pose6& out) {
      st = predict(st, Vec6::Zero(), dt_sub, scenario.noise.process);
      if (m.vision_valid || m.haptic_valid) st = update(st, m, dt_sub);
      out = lowpass(st, st.estimate, dt_sub, scenario.noise);
    };
    for (int sub = 0; sub < n_sub; ++sub) {
      advance(fused, fused_meas, fused_out);
      advance(vision_state, vision_meas, vision_out);
      advance(haptic_state, haptic_meas, haptic_out);
    }
  }
  return records;
}

int distance_band(double distance_m) {
  if (distance_m < 3.0) return 0;
  if (distance_m < 6.0) return 1;
  return 2;
}

int occlusion_band(double fraction) {
  if (fraction < 1.0 / 3.0) return 0;
  if (fraction < 2.0 / 3.0) return 1;
  return 2;
}

std::string distance_band_name(int band) {
  switch (band) {
    case 0: return "0-3m";
    case 1: return "3-6m";
    case 2: return "6-10m";
    default:
      throw std::invalid_argument("distance_band_name: band out of range");
  }
}

std::string occlusion_band_name(int band) {
  switch (band) {
    case 0: return "0-33%";
    case 1: return "33-66%";
    case 2: return "66-100%";
    default:
      throw std::invalid_argument("occlusion_band_name: band out of range");
  }
}

const ResultCell* ResultTable::find(int distance, int occlusion,
                                    bool in_range) const {
  for (const ResultCell& cell : cells)
    if (cell.distance == distance && cell.occlusion == occlusion &&
        cell.in_range == in_range)
      return &cell;
  return nullptr;
}

ResultTable aggregate(std::span<const FrameRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");

  struct Accumulator {
    int n = 0;
    double sq[6] = {0, 0, 0, 0, 0, 0};
  };
  // Keyed so in-range rows sort before out-of-range, then by distance and
  // occlusion band — the row order of the aggregate result table.
  std::map<std::tuple<bool, int, int>, Accumulator> bins;
  for (const FrameRecord& r : records) {
    Accumulator& acc = bins[{!r.haptic_in_range,
                             distance_band(r.camera_distance),
                             occlusion_band(r.occlusion)}];
    ++acc.n;
    acc.sq[0] += r.fused_pos_err * r.fused_pos_err;
    acc.sq[1] += r.fused_att_err * r.fused_att_err;
    acc.sq[2] += r.vision_pos_err * r.vision_pos_err;
    acc.sq[3] += r.vision_att_err * r.vision_att_err;
    acc.sq[4] += r.haptic_pos_err * r.haptic_pos_err;
    acc.sq[5] += r.haptic_att_err * r.haptic_att_err;
  }

  ResultTable table;
  for (const auto& [key, acc] : bins) {
    ResultCell cell;
    cell.in_range = !std::get<0>(key);
    cell.distance = std::get<1>(key);
    cell.occlusion = std::get<2>(key);
    cell.frames = acc.n;
    const auto rmse = [&acc](int i) { return std::sqrt(acc.sq[i] / acc.n); };
    cell.fused_pos_rmse = rmse(0);
    cell.fused_att_rmse = rmse(1);
    cell.vision_pos_rmse = rmse(2);
    cell.vision_att_rmse = rmse(3);
    cell.haptic_pos_rmse = rmse(4);
    cell.haptic_att_rmse = rmse(5);
    table.cells.push_back(cell);
  }
  return table;
}

SweepConfig SweepConfig::defaults() {
  SweepConfig config;
  for (bool in_range : {true, false})
    for (int d = 0; d < 3; ++d)
      for (int o = 0; o < 3; ++o) {
        if (d == 2 && o == 2) continue;  // layout omits far + heaviest
        config.cells.push_back({d, o, in_range});
      }
  return config;
}

Scenario make_cell_scenario(const SweepCellSpec& cell, std::uint64_t seed,
                            double duration, double frame_rate) {
  if (cell.distance < 0 || cell.distance > 2 || cell.occlusion < 0 ||
      cell.occlusion > 2)
    throw ConfigError("make_cell_scenario: band index out of range");
  if (!(duration > 0) || !(frame_rate > 0))
    throw std::invalid_argument(
        "make_cell_scenario: duration and frame rate must be positive");

  static constexpr double kCameraDistance[3] = {2.0, 4.5, 8.0};
  static constexpr double kFractionBase[3] = {0.15, 0.50, 0.80};
  static constexpr double kFractionAmp[3] = {0.10, 0.12, 0.10};
  static constexpr double kBandLo[3] = {0.0, 1.0 / 3.0, 2.0 / 3.0};
  static constexpr double kBandHi[3] = {1.0 / 3.0, 2.0 / 3.0, 1.0};

  const double range = kCameraDistance[cell.distance];

  Scenario scenario;
  char name[64];
  std::snprintf(name, sizeof name, "cell_d%d_o%d_%s", cell.distance,
                cell.occlusion, cell.in_range ? "in" : "out");
  scenario.name = name;
  scenario.seed = seed;
  scenario.duration = duration;
  scenario.frame_rate = frame_rate;
  scenario.target = ShapePrimitive::capsule(0.045, 0.30);
  scenario.camera = CameraModel::look_at(320.0, 320.0, 320, 240,
                                         Vec3(0.0, 0.0, 1.2),
                                         Vec3(range, 0.0, 1.2));

  // Per-seed phases decorrelate repeats beyond measurement noise alone.
  Rng phase_rng(Rng::derive(seed, 77));
  double phase[5];
  for (double& p : phase) p = 2.0 * M_PI * phase_rng.uniform();

  // Gentle drift: a few centimeters of lateral/vertical oscillation with a
  // slow roll/pitch wobble, sampled onto half-second spline knots.
  for (double t = 0.0; t <= duration + 0.25; t += 0.5) {
    Pose6 pose;
    pose.position =
        Vec3(range, 0.04 * std::sin(2.0 * M_PI * t / 5.0 + phase[0]),
             1.2 + 0.05 * std::sin(2.0 * M_PI * t / 3.0 + phase[1]));
    pose.attitude =
        Vec3(0.15 * std::sin(2.0 * M_PI * t / 4.0 + phase[2]),
             0.20 * std::sin(2.0 * M_PI * t / 3.5 + phase[3]), 0.0);
    scenario.trajectory.waypoints.push_back({t, pose});
  }
  normalize_trajectory(scenario.trajectory);

  // Degradation schedule: piecewise-constant half-second windows tracking
  // a slow sine, clamped inside the cell's occlusion band.
  for (double t = 0.0; t < duration; t += 0.5) {
    OcclusionWindow window;
    window.start = t;
    window.end = t + 0.5;
    const double raw =
        kFractionBase[cell.occlusion] +
        kFractionAmp[cell.occlusion] *
            std::sin(2.0 * M_PI * t / 2.7 + phase[4]);
    window.fraction =
        std::clamp(raw, kBandLo[cell.occlusion] + 0.01,
                   std::min(kBandHi[cell.occlusion] - 0.01, 0.95));
    scenario.occlusion.windows.push_back(window);
  }

  // Four proximity sensors wrapped around the target — or displaced
  // sideways, out of sensing range. Three face the capsule's side at
  // staggered heights; the fourth sits under the bottom end cap, which
  // pins the translation along the symmetry axis.
  scenario.rig.base = RigidTransform::translate(
      Vec3(range, cell.in_range ? 0.0 : 0.8, 1.2));
  scenario.rig.links.resize(6);
  scenario.joint_angles.assign(6, 0.0);
  const Vec3 mount_offsets[4] = {Vec3(0.09, 0.0, -0.06),
                                 Vec3(-0.09, 0.0, 0.0),
                                 Vec3(0.0, 0.09, 0.06),
                                 Vec3(0.05, 0.0, -0.22)};
  for (const Vec3& offset : mount_offsets)
    scenario.rig.mounts.push_back({5, RigidTransform::translate(offset)});
  scenario.sensors = {calibration_for_class("forearm")};
  return scenario;
}

SweepResult sweep(const SweepConfig& config) {
  if (config.cells.empty()) throw ConfigError("sweep: no cells configured");
  if (config.seeds_per_cell < 1)
    throw ConfigError("sweep: seeds_per_cell must be >= 1");
  if (!(config.duration > 0) || !(config.frame_rate > 0))
    throw ConfigError("sweep: duration and frame rate must be positive");

  SweepResult result;
  result.runs.reserve(config.cells.size() *
                      static_cast<std::size_t>(config.seeds_per_cell));
  for (std::size_t ci = 0; ci < config.cells.size(); ++ci)
    for (int rep = 0; rep < config.seeds_per_cell; ++rep) {
      SweepRun run;
      run.cell = config.cells[ci];
      run.repeat = rep;
      run.seed = Rng::derive(config.master_seed, ci,
                             static_cast<std::uint64_t>(rep));
      result.runs.push_back(std::move(run));
    }

  const auto run_one = [&config](SweepRun& run) {
    try {
      const Scenario scenario = make_cell_scenario(
          run.cell, run.seed, config.duration, config.frame_rate);
      run.records = run_scenario(scenario);
    } catch (const std::exception& e) {
      run.failed = true;
      run.error = e.what();
    }
  };

  const int jobs =
      std::clamp(config.jobs, 1, static_cast<int>(result.runs.size()));
  if (jobs <= 1) {
    for (SweepRun& run : result.runs) run_one(run);
  } else {
    // Workers claim fixed (cell, repeat) slots, so the outcome is
    // identical to the sequential order regardless of scheduling.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&result, &run_one, &next] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= result.runs.size()) return;
          run_one(result.runs[i]);
        }
      });
    for (std::thread& worker : workers) worker.join();
  }

  std::vector<FrameRecord> all;
  for (const SweepRun& run : result.runs) {
    if (run.failed) {
      ++result.failures;
      continue;
    }
    all.insert(all.end(), run.records.begin(), run.records.end());
  }
  if (!all.empty()) result.table = aggregate(all);
  return result;
}

namespace {

void append_double(std::string& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  out += buf;
}

void append_pose(std::string& out, const Pose6& pose) {
  for (int i = 0; i < 3; ++i) {
    out += ',';
    append_double(out, pose.position[i]);
  }
  for (int i = 0; i < 3; ++i) {
    out += ',';
    append_double(out, pose.attitude[i]);
  }
}

}  // namespace

std::string records_csv(std::span<const FrameRecord> records) {
  std::string out =
      "t_s,"
      "truth_x_m,truth_y_m,truth_z_m,"
      "truth_roll_rad,truth_pitch_rad,truth_yaw_rad,"
      "vision_valid,vision_x_m,vision_y_m,vision_z_m,"
      "vision_roll_rad,vision_pitch_rad,vision_yaw_rad,r_v_scalar,"
      "haptic_valid,haptic_in_range,haptic_x_m,haptic_y_m,haptic_z_m,"
      "haptic_roll_rad,haptic_pitch_rad,haptic_yaw_rad,"
      "fused_x_m,fused_y_m,fused_z_m,"
      "fused_roll_rad,fused_pitch_rad,fused_yaw_rad,"
      "vision_only_x_m,vision_only_y_m,vision_only_z_m,"
      "vision_only_roll_rad,vision_only_pitch_rad,vision_only_yaw_rad,"
      "haptic_only_x_m,haptic_only_y_m,haptic_only_z_m,"
      "haptic_only_roll_rad,haptic_only_pitch_rad,haptic_only_yaw_rad,"
      "occlusion_fraction,camera_distance_m,"
      "fused_pos_err_m,fused_att_err_rad,"
      "vision_pos_err_m,vision_att_err_rad,"
      "haptic_pos_err_m,haptic_att_err_rad\n";
  for (const FrameRecord& r : records) {
    append_double(out, r.t);
    append_pose(out, r.truth);
    out += r.vision_valid ? ",1" : ",0";
    append_pose(out, r.vision_estimate);
    out += ',';
    append_double(out, r.r_v_scalar);
    out += r.haptic_valid ? ",1" : ",0";
    out += r.haptic_in_range ? ",1" : ",0";
    append_pose(out, r.haptic_estimate);
    append_pose(out, r.fused);
    append_pose(out, r.vision_only);
    append_pose(out, r.haptic_only);
    out += ',';
    append_double(out, r.occlusion);
    out += ',';
    append_double(out, r.camera_distance);
    for (double err : {r.fused_pos_err, r.fused_att_err, r.vision_pos_err,
                       r.vision_att_err, r.haptic_pos_err,
                       r.haptic_att_err}) {
      out += ',';
      append_double(out, err);
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ConfigError("cannot move temporary file into place at: " + path);
  }
}

}  // namespace occlufuse
