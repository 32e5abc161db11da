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

// Command-line front end: calibration fitting, single-scenario runs,
// grid sweeps, config inspection, and a debug mask emitter.
//
// Exit codes: 0 success, 1 partial failure (some sweep cells failed),
// 2 usage or configuration error, 3 numerical failure.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "occlufuse/errors.hpp"
#include "occlufuse/harness.hpp"
#include "occlufuse/mask.hpp"
#include "occlufuse/scene.hpp"
#include "occlufuse/sensor.hpp"

namespace {

using namespace occlufuse;

constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

/// Seed precedence: --seed flag, then OCCLUFUSE_SEED, then the fallback
/// (scene-file seed or zero).
std::optional<std::uint64_t> environment_seed() {
  const char* raw = std::getenv("OCCLUFUSE_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0')
    throw ConfigError(std::string("OCCLUFUSE_SEED is not an integer: ") +
                      raw);
  return static_cast<std::uint64_t>(value);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::uint64_t fallback) {
  if (flag) return *flag;
  if (const auto env = environment_seed()) return *env;
  return fallback;
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + dir +
                      "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

/// Parses a two-column (d_m, v_volts) CSV. A single leading header line is
/// allowed; every other row must hold two finite numbers.
std::vector<std::pair<double, double>> read_fit_samples(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("fit: cannot open '" + path + "'");
  std::vector<std::pair<double, double>> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t,") == std::string::npos) continue;
    double d = 0.0;
    double v = 0.0;
    char trailing = '\0';
    const int got =
        std::sscanf(line.c_str(), " %lf , %lf %c", &d, &v, &trailing);
    if (got < 2) {
      // Permit one header row naming the columns.
      if (line_no == 1 && line.find_first_of("0123456789") ==
                              std::string::npos)
        continue;
      throw ConfigError("fit: malformed row at line " +
                        std::to_string(line_no) + ": '" + line + "'");
    }
    if (got > 2 || !std::isfinite(d) || !std::isfinite(v))
      throw ConfigError("fit: malformed row at line " +
                        std::to_string(line_no) + ": '" + line + "'");
    samples.emplace_back(d, v);
  }
  if (samples.empty())
    throw ConfigError("fit: no samples in '" + path + "'");
  return samples;
}

int cmd_fit(const std::string& samples_path, const std::string& output,
            const std::string& object_class) {
  const auto samples = read_fit_samples(samples_path);
  const FitResult fit = fit_params(samples);

  SensorModel model;
  model.object_class = object_class;
  model.a1 = fit.a1;
  model.a2 = fit.a2;
  model.a3 = fit.a3;
  const SensorModel calibrated[] = {model};
  save_calibration(output, calibrated);

  std::printf("fitted %zu samples in %d iterations\n", samples.size(),
              fit.iterations);
  std::printf("  a1 = %.9g V\n", fit.a1);
  std::printf("  a2 = %.9g 1/m^2\n", fit.a2);
  std::printf("  a3 = %.9g V\n", fit.a3);
  std::printf("  residual_rms = %.9g V\n", fit.residual_rms);
  std::printf("wrote %s\n", output.c_str());
  return 0;
}

struct StreamRmse {
  double pos = 0.0;
  double att = 0.0;
};

StreamRmse stream_rmse(std::span<const FrameRecord> records,
                       double FrameRecord::* pos_err,
                       double FrameRecord::* att_err) {
  StreamRmse out;
  if (records.empty()) return out;
  double sum_pos = 0.0;
  double sum_att = 0.0;
  for (const FrameRecord& rec : records) {
    sum_pos += (rec.*pos_err) * (rec.*pos_err);
    sum_att += (rec.*att_err) * (rec.*att_err);
  }
  out.pos = std::sqrt(sum_pos / static_cast<double>(records.size()));
  out.att = std::sqrt(sum_att / static_cast<double>(records.size()));
  return out;
}

int cmd_simulate(const std::string& scene_path,
                 const std::optional<std::uint64_t>& seed_flag,
                 const std::string& out_dir) {
  Scenario scenario = load_scenario(scene_path);
  scenario.seed = resolve_seed(seed_flag, scenario.seed);

  const std::vector<FrameRecord> records = run_scenario(scenario);

  ensure_output_dir(out_dir);
  write_file_atomic(join_path(out_dir, "records.csv"), records_csv(records));
  write_file_atomic(join_path(out_dir, "summary.json"),
                    run_summary_json(scenario, records));

  const StreamRmse fused = stream_rmse(records, &FrameRecord::fused_pos_err,
                                       &FrameRecord::fused_att_err);
  const StreamRmse vision = stream_rmse(
      records, &FrameRecord::vision_pos_err, &FrameRecord::vision_att_err);
  const StreamRmse haptic = stream_rmse(
      records, &FrameRecord::haptic_pos_err, &FrameRecord::haptic_att_err);
  std::size_t vision_lost = 0;
  for (const FrameRecord& rec : records)
    vision_lost += rec.vision_valid ? 0 : 1;

  std::printf("scenario '%s': %zu frames, seed %" PRIu64 "\n",
              scenario.name.c_str(), records.size(), scenario.seed);
  std::printf("  fused       rmse: %.6g m, %.6g rad\n", fused.pos, fused.att);
  std::printf("  vision-only rmse: %.6g m, %.6g rad\n", vision.pos,
              vision.att);
  std::printf("  haptic-only rmse: %.6g m, %.6g rad\n", haptic.pos,
              haptic.att);
  if (vision_lost > 0)
    std::printf("  vision lost track on %zu of %zu frames\n", vision_lost,
                records.size());
  std::printf("wrote %s and %s\n", join_path(out_dir, "records.csv").c_str(),
              join_path(out_dir, "summary.json").c_str());
  return 0;
}

int cmd_sweep(SweepConfig config,
              const std::optional<std::uint64_t>& seed_flag,
              const std::string& out_dir, bool keep_records) {
  config.master_seed = resolve_seed(seed_flag, config.master_seed);

  const SweepResult result = sweep(config);

  ensure_output_dir(out_dir);
  write_file_atomic(join_path(out_dir, "table.json"),
                    result_table_json(result.table));
  write_file_atomic(join_path(out_dir, "table.csv"),
                    result_table_csv(result.table));
  write_file_atomic(join_path(out_dir, "plot.dat"),
                    result_plot_data(result.table));
  if (keep_records) {
    for (const SweepRun& run : result.runs) {
      if (run.failed) continue;
      char name[128];
      std::snprintf(name, sizeof name, "records_d%d_o%d_%s_r%d.csv",
                    run.cell.distance, run.cell.occlusion,
                    run.cell.in_range ? "in" : "out", run.repeat);
      write_file_atomic(join_path(out_dir, name), records_csv(run.records));
    }
  }

  std::printf("%s", result_table_csv(result.table).c_str());
  std::printf("wrote table.json, table.csv, plot.dat under %s\n",
              out_dir.c_str());

  if (result.failures > 0) {
    for (const SweepRun& run : result.runs)
      if (run.failed)
        std::fprintf(stderr,
                     "cell d%d o%d %s repeat %d (seed %" PRIu64 "): %s\n",
                     run.cell.distance, run.cell.occlusion,
                     run.cell.in_range ? "in-range" : "out-of-range",
                     run.repeat, run.seed, run.error.c_str());
    std::fprintf(stderr, "%d of %zu runs failed\n", result.failures,
                 result.runs.size());
    return kExitPartial;
  }
  return 0;
}

int cmd_render_mask(const std::string& scene_path, double t,
                    const std::string& output) {
  const Scenario scenario = load_scenario(scene_path);
  const Pose6 truth = scenario.trajectory.sample(t);
  const auto occluders = scenario.occlusion.occluders_at(t);
  const Mask mask =
      render_mask(scenario.target, truth, scenario.camera, occluders);
  write_pgm(mask, output);
  std::printf("wrote %dx%d mask (%d target pixels) to %s\n", mask.width,
              mask.height, mask.count_nonzero(), output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "occlufuse: multimodal 6-DoF pose estimation under occlusion"};
  app.require_subcommand(1);

  // fit ------------------------------------------------------------------
  std::string fit_input;
  std::string fit_output = "calibration.json";
  std::string fit_class = "custom";
  CLI::App* fit = app.add_subcommand(
      "fit", "Fit the response curve to a (d_m, v_volts) CSV");
  fit->add_option("samples", fit_input, "Input CSV with columns d_m,v_volts")
      ->required();
  fit->add_option("-o,--output", fit_output, "Calibration JSON to write")->capture_default_str();
  fit->add_option("--object-class", fit_class,
                  "Class label stored with the fitted parameters")->capture_default_str();

  // simulate -------------------------------------------------------------
  std::string sim_scene;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out = ".";
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run one scenario and write records.csv + summary.json");
  simulate->add_option("scene", sim_scene, "Scenario JSON file")->required();
  simulate->add_option("--seed", sim_seed,
                       "Seed override (falls back to OCCLUFUSE_SEED, then "
                       "the scene file)");
  simulate->add_option("-o,--output-dir", sim_out, "Output directory")->capture_default_str();

  // sweep ------------------------------------------------------------------
  std::optional<std::uint64_t> sweep_seed;
  std::string sweep_out = ".";
  SweepConfig sweep_config = SweepConfig::defaults();
  bool sweep_records = false;
  std::optional<int> sweep_distance;
  std::optional<int> sweep_occlusion;
  bool sweep_out_of_range = false;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Run the (distance x occlusion) grid and write the table");
  sweep_cmd->add_option("--seed,--master-seed", sweep_seed,
                        "Master seed (falls back to OCCLUFUSE_SEED)");
  sweep_cmd->add_option("-o,--output-dir", sweep_out, "Output directory")->capture_default_str();
  sweep_cmd->add_option("--seeds-per-cell", sweep_config.seeds_per_cell,
                        "Repeats per grid cell")->capture_default_str();
  sweep_cmd->add_option("--duration", sweep_config.duration,
                        "Seconds per scenario")->capture_default_str();
  sweep_cmd->add_option("--frame-rate", sweep_config.frame_rate,
                        "Camera frame rate in Hz")->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep_config.jobs,
                        "Parallel scenario workers")->capture_default_str();
  sweep_cmd->add_flag("--records", sweep_records,
                      "Also write per-run records CSVs");
  sweep_cmd->add_option("--distance-band", sweep_distance,
                        "Restrict to one distance band (0..2)");
  sweep_cmd->add_option("--occlusion-band", sweep_occlusion,
                        "Restrict to one occlusion band (0..2)");
  sweep_cmd->add_flag("--out-of-range", sweep_out_of_range,
                      "Single-cell mode: rig out of sensing range");

  // config ---------------------------------------------------------------
  CLI::App* config = app.add_subcommand("config", "Configuration utilities");
  config->require_subcommand(1);
  config->add_subcommand("dump", "Print every built-in default as JSON");

  // render-mask ----------------------------------------------------------
  std::string mask_scene;
  double mask_time = 0.0;
  std::string mask_output = "mask.pgm";
  CLI::App* render = app.add_subcommand(
      "render-mask", "Render the target silhouette at one instant (PGM)");
  render->add_option("scene", mask_scene, "Scenario JSON file")->required();
  render->add_option("--time", mask_time, "Trajectory time in seconds")->capture_default_str();
  render->add_option("-o,--output", mask_output, "PGM file to write")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*fit) return cmd_fit(fit_input, fit_output, fit_class);
    if (*simulate) return cmd_simulate(sim_scene, sim_seed, sim_out);
    if (*sweep_cmd) {
      if (sweep_distance || sweep_occlusion) {
        SweepCellSpec cell;
        cell.distance = sweep_distance.value_or(0);
        cell.occlusion = sweep_occlusion.value_or(0);
        cell.in_range = !sweep_out_of_range;
        sweep_config.cells = {cell};
      }
      return cmd_sweep(sweep_config, sweep_seed, sweep_out, sweep_records);
    }
    if (*config) {
      std::printf("%s", default_config_json().c_str());
      return 0;
    }
    if (*render) return cmd_render_mask(mask_scene, mask_time, mask_output);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
