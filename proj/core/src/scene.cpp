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

#include "occlufuse/scene.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "occlufuse/errors.hpp"

namespace occlufuse {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("scene: " + where + ": " + what);
}

Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected [x, y, z]");
  for (const auto& v : j)
    if (!v.is_number()) fail(where, "expected three numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec6 vec6_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 6) fail(where, "expected six numbers");
  Vec6 v;
  for (int i = 0; i < 6; ++i) {
    if (!j[i].is_number()) fail(where, "expected six numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

Pose6 pose_from(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a pose object");
  Pose6 pose;
  if (j.contains("position_m"))
    pose.position = vec3_from(j.at("position_m"), where + ".position_m");
  if (j.contains("attitude_rad"))
    pose.attitude = vec3_from(j.at("attitude_rad"), where + ".attitude_rad");
  return pose;
}

RigidTransform transform_from(const json& j, const std::string& where) {
  return pose_to_transform(pose_from(j, where));
}

ShapePrimitive shape_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    fail(where, "expected a shape object with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  const int budget = j.value("tessellation_budget", 1024);
  if (kind == "sphere")
    return ShapePrimitive::sphere(j.at("radius_m").get<double>(), budget);
  if (kind == "capsule")
    return ShapePrimitive::capsule(j.at("radius_m").get<double>(),
                                   j.at("length_m").get<double>(), budget);
  if (kind == "cylinder")
    return ShapePrimitive::cylinder(j.at("radius_m").get<double>(),
                                    j.at("length_m").get<double>(), budget);
  if (kind == "box") {
    const Vec3 he = vec3_from(j.at("half_extents_m"),
                              where + ".half_extents_m");
    return ShapePrimitive::box(he.x(), he.y(), he.z(), budget);
  }
  fail(where, "unknown shape kind: " + kind);
}

CameraModel camera_from(const json& j) {
  if (!j.is_object()) fail("camera", "expected an object");
  const double fx = j.at("fx_px").get<double>();
  const double fy = j.value("fy_px", fx);
  const int width = j.at("width_px").get<int>();
  const int height = j.at("height_px").get<int>();
  const Vec3 eye = vec3_from(j.at("eye_m"), "camera.eye_m");
  const Vec3 look = vec3_from(j.at("look_at_m"), "camera.look_at_m");
  const Vec3 up = j.contains("up") ? vec3_from(j.at("up"), "camera.up")
                                   : Vec3(0.0, 0.0, 1.0);
  const CameraModel camera =
      CameraModel::look_at(fx, fy, width, height, eye, look, up);
  if (!camera.valid()) fail("camera", "invalid intrinsics or image size");
  return camera;
}

Trajectory trajectory_from(const json& j) {
  if (!j.is_object() || !j.contains("waypoints"))
    fail("trajectory", "expected an object with \"waypoints\"");
  Trajectory trajectory;
  for (const auto& w : j.at("waypoints")) {
    PoseWaypoint waypoint;
    if (!w.is_object() || !w.contains("t_s"))
      fail("trajectory.waypoints", "each waypoint needs \"t_s\"");
    waypoint.t = w.at("t_s").get<double>();
    waypoint.pose = pose_from(w, "trajectory.waypoints");
    trajectory.waypoints.push_back(waypoint);
  }
  normalize_trajectory(trajectory);
  if (!trajectory.valid())
    fail("trajectory", "needs at least one waypoint with distinct times");
  return trajectory;
}

KinematicChain rig_from(const json& j) {
  if (!j.is_object()) fail("rig", "expected an object");
  KinematicChain chain;
  if (j.contains("base")) chain.base = transform_from(j.at("base"), "rig.base");
  for (const auto& lj : j.value("links", json::array())) {
    KinematicChain::Link link;
    if (lj.contains("axis")) link.axis = vec3_from(lj.at("axis"), "rig.links.axis");
    if (lj.contains("offset"))
      link.offset = transform_from(lj.at("offset"), "rig.links.offset");
    chain.links.push_back(link);
  }
  for (const auto& mj : j.value("mounts", json::array())) {
    KinematicChain::Mount mount;
    mount.link = mj.at("link").get<int>();
    if (mj.contains("offset"))
      mount.offset = transform_from(mj.at("offset"), "rig.mounts.offset");
    chain.mounts.push_back(mount);
  }
  if (!chain.valid()) fail("rig", "chain fails invariants");
  return chain;
}

SensorModel sensor_entry_from(const json& j) {
  if (j.is_string()) return calibration_for_class(j.get<std::string>());
  if (!j.is_object()) fail("sensors", "expected a class name or an object");
  if (j.contains("calibration_file")) {
    const auto models =
        load_calibration(j.at("calibration_file").get<std::string>());
    if (j.contains("object_class")) {
      const std::string cls = j.at("object_class").get<std::string>();
      for (const SensorModel& m : models)
        if (m.object_class == cls) return m;
      fail("sensors", "class not present in calibration file: " + cls);
    }
    if (models.size() != 1)
      fail("sensors",
           "calibration file holds several classes; pick one with "
           "\"object_class\"");
    return models.front();
  }
  if (j.contains("a1_v")) {
    SensorModel m;
    m.object_class = j.value("object_class", std::string("custom"));
    m.a1 = j.at("a1_v").get<double>();
    m.a2 = j.at("a2_per_m2").get<double>();
    m.a3 = j.at("a3_v").get<double>();
    m.noise_variance = j.value("noise_variance_v2", m.noise_variance);
    m.range = j.value("range_m", m.range);
    m.sigma0 = j.value("sigma0_m", m.sigma0);
    m.noise_curvature = j.value("noise_curvature_per_m2", m.noise_curvature);
    if (!m.valid()) fail("sensors", "parameters fail invariants");
    return m;
  }
  if (j.contains("object_class"))
    return calibration_for_class(j.at("object_class").get<std::string>());
  fail("sensors",
       "entry needs \"object_class\", \"calibration_file\", or full "
       "parameters");
}

OcclusionSchedule occlusion_from(const json& j) {
  if (!j.is_object()) fail("occlusion", "expected an object");
  OcclusionSchedule schedule;
  for (const auto& wj : j.value("windows", json::array())) {
    OcclusionWindow window;
    window.start = wj.at("start_s").get<double>();
    window.end = wj.at("end_s").get<double>();
    window.fraction = wj.at("fraction").get<double>();
    schedule.windows.push_back(window);
  }
  for (const auto& oj : j.value("occluders", json::array())) {
    SceneOccluder occluder;
    occluder.shape = shape_from(oj.at("shape"), "occlusion.occluders.shape");
    occluder.pose = pose_from(oj.at("pose"), "occlusion.occluders.pose");
    occluder.start = oj.value("start_s", 0.0);
    if (oj.contains("end_s")) occluder.end = oj.at("end_s").get<double>();
    schedule.occluders.push_back(occluder);
  }
  schedule.pixel_noise = j.value("pixel_noise", 0.0);
  return schedule;
}

NoiseConfig noise_from(const json& j) {
  if (!j.is_object()) fail("noise", "expected an object");
  NoiseConfig noise;
  if (j.contains("process_diag"))
    noise.process =
        vec6_from(j.at("process_diag"), "noise.process_diag").asDiagonal();
  if (j.contains("vision_weight_diag"))
    noise.vision_weight = vec6_from(j.at("vision_weight_diag"),
                                    "noise.vision_weight_diag")
                              .asDiagonal();
  noise.haptic_sigma2_near =
      j.value("haptic_sigma2_near", noise.haptic_sigma2_near);
  noise.haptic_growth_exponent =
      j.value("haptic_growth_exponent", noise.haptic_growth_exponent);
  noise.haptic_curve_range =
      j.value("haptic_curve_range_m", noise.haptic_curve_range);
  if (j.contains("haptic_attitude_observable")) {
    const json& a = j.at("haptic_attitude_observable");
    if (!a.is_array() || a.size() != 3)
      fail("noise.haptic_attitude_observable", "expected three booleans");
    for (int i = 0; i < 3; ++i)
      noise.haptic_attitude_observable[static_cast<std::size_t>(i)] =
          a[i].get<bool>();
  }
  noise.omega_n = j.value("omega_n_rad_s", noise.omega_n);
  noise.zeta = j.value("zeta", noise.zeta);
  if (!noise.valid()) fail("noise", "configuration fails invariants");
  return noise;
}

void append_double(std::string& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  out += buf;
}

json diag6(const Mat6& m) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(m(i, i));
  return a;
}

json sensor_to_json(const SensorModel& m) {
  return json{{"object_class", m.object_class},
              {"a1_v", m.a1},
              {"a2_per_m2", m.a2},
              {"a3_v", m.a3},
              {"noise_variance_v2", m.noise_variance},
              {"range_m", m.range},
              {"sigma0_m", m.sigma0},
              {"noise_curvature_per_m2", m.noise_curvature}};
}

json cell_to_json(const ResultCell& cell) {
  return json{{"distance_band", distance_band_name(cell.distance)},
              {"occlusion_band", occlusion_band_name(cell.occlusion)},
              {"haptic_in_range", cell.in_range},
              {"frames", cell.frames},
              {"fused_pos_rmse_m", cell.fused_pos_rmse},
              {"fused_att_rmse_rad", cell.fused_att_rmse},
              {"vision_pos_rmse_m", cell.vision_pos_rmse},
              {"vision_att_rmse_rad", cell.vision_att_rmse},
              {"haptic_pos_rmse_m", cell.haptic_pos_rmse},
              {"haptic_att_rmse_rad", cell.haptic_att_rmse}};
}

json table_to_json(const ResultTable& table) {
  json sections = json::array();
  for (const bool in_range : {true, false}) {
    json rows = json::array();
    for (const ResultCell& cell : table.cells)
      if (cell.in_range == in_range) rows.push_back(cell_to_json(cell));
    if (!rows.empty())
      sections.push_back(json{{"haptic_in_range", in_range}, {"rows", rows}});
  }
  return json{{"sections", sections}};
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: invalid JSON: ") + e.what());
  }
  try {
    Scenario scenario;
    scenario.name = j.value("name", scenario.name);
    scenario.duration = j.value("duration_s", scenario.duration);
    scenario.frame_rate = j.value("frame_rate_hz", scenario.frame_rate);
    scenario.seed = j.value("seed", scenario.seed);
    if (j.contains("target"))
      scenario.target = shape_from(j.at("target"), "target");
    if (!j.contains("trajectory")) fail("trajectory", "section is required");
    scenario.trajectory = trajectory_from(j.at("trajectory"));
    if (!j.contains("camera")) fail("camera", "section is required");
    scenario.camera = camera_from(j.at("camera"));
    if (j.contains("rig")) scenario.rig = rig_from(j.at("rig"));
    if (j.contains("joint_angles_rad"))
      scenario.joint_angles =
          j.at("joint_angles_rad").get<std::vector<double>>();
    else
      scenario.joint_angles.assign(scenario.rig.links.size(), 0.0);
    if (j.contains("sensors")) {
      const json& sj = j.at("sensors");
      if (sj.is_array())
        for (const auto& entry : sj)
          scenario.sensors.push_back(sensor_entry_from(entry));
      else
        scenario.sensors = {sensor_entry_from(sj)};
    } else if (!scenario.rig.mounts.empty()) {
      fail("sensors", "section is required when the rig has mounts");
    }
    if (j.contains("occlusion"))
      scenario.occlusion = occlusion_from(j.at("occlusion"));
    if (j.contains("noise")) scenario.noise = noise_from(j.at("noise"));
    scenario.vision_base_fraction =
        j.value("vision_base_fraction", scenario.vision_base_fraction);
    if (j.contains("initial_estimate"))
      scenario.initial_estimate =
          pose_from(j.at("initial_estimate"), "initial_estimate");
    if (j.contains("initial_covariance_diag"))
      scenario.initial_covariance =
          vec6_from(j.at("initial_covariance_diag"),
                    "initial_covariance_diag")
              .asDiagonal();
    if (!scenario.valid())
      fail(scenario.name, "scenario fails invariants");
    return scenario;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

std::string default_config_json() {
  const NoiseConfig noise;
  const Scenario scenario;
  const SweepConfig sweep_config = SweepConfig::defaults();

  json fusion{
      {"process_diag", diag6(noise.process)},
      {"vision_weight_diag", diag6(noise.vision_weight)},
      {"haptic_sigma2_near", noise.haptic_sigma2_near},
      {"haptic_growth_exponent", noise.haptic_growth_exponent},
      {"haptic_curve_range_m", noise.haptic_curve_range},
      {"haptic_attitude_observable",
       json::array({noise.haptic_attitude_observable[0],
                    noise.haptic_attitude_observable[1],
                    noise.haptic_attitude_observable[2]})},
      {"omega_n_rad_s", noise.omega_n},
      {"zeta", noise.zeta},
      {"unobservable_variance", kUnobservableVariance}};

  json classes = json::array();
  for (const SensorModel& m : default_calibration())
    classes.push_back(sensor_to_json(m));

  json scenario_defaults{
      {"duration_s", scenario.duration},
      {"frame_rate_hz", scenario.frame_rate},
      {"vision_base_fraction", scenario.vision_base_fraction},
      {"initial_covariance_diag", diag6(scenario.initial_covariance)},
      {"target",
       {{"kind", "capsule"},
        {"radius_m", scenario.target.radius()},
        {"length_m", scenario.target.length()}}}};

  json sweep_defaults{{"cells", sweep_config.cells.size()},
                      {"seeds_per_cell", sweep_config.seeds_per_cell},
                      {"master_seed", sweep_config.master_seed},
                      {"duration_s", sweep_config.duration},
                      {"frame_rate_hz", sweep_config.frame_rate},
                      {"jobs", sweep_config.jobs}};

  const json j{{"fusion", fusion},
               {"sensor_classes", classes},
               {"scenario", scenario_defaults},
               {"sweep", sweep_defaults}};
  return j.dump(2) + "\n";
}

std::string result_table_json(const ResultTable& table) {
  return table_to_json(table).dump(2) + "\n";
}

std::string result_table_csv(const ResultTable& table) {
  std::string out =
      "distance_band,occlusion_band,haptic_in_range,frames,"
      "fused_pos_rmse_m,fused_att_rmse_rad,"
      "vision_pos_rmse_m,vision_att_rmse_rad,"
      "haptic_pos_rmse_m,haptic_att_rmse_rad\n";
  for (const bool in_range : {true, false})
    for (const ResultCell& cell : table.cells) {
      if (cell.in_range != in_range) continue;
      out += distance_band_name(cell.distance);
      out += ',';
      out += occlusion_band_name(cell.occlusion);
      out += cell.in_range ? ",1" : ",0";
      out += ',';
      out += std::to_string(cell.frames);
      for (const double value :
           {cell.fused_pos_rmse, cell.fused_att_rmse, cell.vision_pos_rmse,
            cell.vision_att_rmse, cell.haptic_pos_rmse,
            cell.haptic_att_rmse}) {
        out += ',';
        append_double(out, value);
      }
      out += '\n';
    }
  return out;
}

std::string result_plot_data(const ResultTable& table) {
  std::string out =
      "# distance_band occlusion_band haptic_in_range method pos_rmse_m "
      "att_rmse_rad\n";
  for (const bool in_range : {true, false})
    for (const ResultCell& cell : table.cells) {
      if (cell.in_range != in_range) continue;
      const std::pair<const char*, std::pair<double, double>> methods[] = {
          {"fused", {cell.fused_pos_rmse, cell.fused_att_rmse}},
          {"vision", {cell.vision_pos_rmse, cell.vision_att_rmse}},
          {"haptic", {cell.haptic_pos_rmse, cell.haptic_att_rmse}}};
      for (const auto& [method, rmse] : methods) {
        out += distance_band_name(cell.distance);
        out += ' ';
        out += occlusion_band_name(cell.occlusion);
        out += cell.in_range ? " 1 " : " 0 ";
        out += method;
        out += ' ';
        append_double(out, rmse.first);
        out += ' ';
        append_double(out, rmse.second);
        out += '\n';
      }
    }
  return out;
}

std::string run_summary_json(const Scenario& scenario,
                             std::span<const FrameRecord> records) {
  json j;
  j["scenario"] = scenario.name;
  j["seed"] = scenario.seed;
  j["frames"] = records.size();
  if (!records.empty()) {
    double sq[6] = {0, 0, 0, 0, 0, 0};
    int vision_valid = 0, haptic_valid = 0, haptic_in_range = 0;
    double occlusion_sum = 0.0;
    for (const FrameRecord& r : records) {
      sq[0] += r.fused_pos_err * r.fused_pos_err;
      sq[1] += r.fused_att_err * r.fused_att_err;
      sq[2] += r.vision_pos_err * r.vision_pos_err;
      sq[3] += r.vision_att_err * r.vision_att_err;
      sq[4] += r.haptic_pos_err * r.haptic_pos_err;
      sq[5] += r.haptic_att_err * r.haptic_att_err;
      vision_valid += r.vision_valid ? 1 : 0;
      haptic_valid += r.haptic_valid ? 1 : 0;
      haptic_in_range += r.haptic_in_range ? 1 : 0;
      occlusion_sum += r.occlusion;
    }
    const double n = static_cast<double>(records.size());
    j["rmse"] = json{{"fused_pos_m", std::sqrt(sq[0] / n)},
                     {"fused_att_rad", std::sqrt(sq[1] / n)},
                     {"vision_only_pos_m", std::sqrt(sq[2] / n)},
                     {"vision_only_att_rad", std::sqrt(sq[3] / n)},
                     {"haptic_only_pos_m", std::sqrt(sq[4] / n)},
                     {"haptic_only_att_rad", std::sqrt(sq[5] / n)}};
    j["vision_valid_fraction"] = vision_valid / n;
    j["haptic_valid_fraction"] = haptic_valid / n;
    j["haptic_in_range_fraction"] = haptic_in_range / n;
    j["mean_occlusion_fraction"] = occlusion_sum / n;
    j["table"] = table_to_json(aggregate(records));
  }
  return j.dump(2) + "\n";
}

}  // namespace occlufuse
