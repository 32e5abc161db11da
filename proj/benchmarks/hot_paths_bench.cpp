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

// Microbenchmarks for the per-frame hot paths: silhouette rendering, the
// overlap objective, both pose solvers, and one observer cycle.

#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "occlufuse/geometry.hpp"
#include "occlufuse/haptic.hpp"
#include "occlufuse/mask.hpp"
#include "occlufuse/observer.hpp"
#include "occlufuse/rng.hpp"
#include "occlufuse/sensor.hpp"
#include "occlufuse/vision.hpp"

namespace {

using namespace occlufuse;

CameraModel bench_camera() {
  return CameraModel::look_at(320.0, 320.0, 320, 240, Vec3(0.0, 0.0, 1.2),
                              Vec3(2.0, 0.0, 1.2));
}

Pose6 bench_pose() {
  Pose6 p;
  p.position = Vec3(2.0, 0.0, 1.2);
  p.attitude = Vec3(0.1, -0.05, 0.2);
  return p;
}

void BM_RenderMask(benchmark::State& state) {
  const CameraModel cam = bench_camera();
  const ShapePrimitive shape = ShapePrimitive::capsule(0.045, 0.30);
  const Pose6 pose = bench_pose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_mask(shape, pose, cam));
  }
}
BENCHMARK(BM_RenderMask);

void BM_MaskOverlap(benchmark::State& state) {
  const CameraModel cam = bench_camera();
  const ShapePrimitive shape = ShapePrimitive::capsule(0.045, 0.30);
  Pose6 shifted = bench_pose();
  shifted.position.y() += 0.01;
  const Mask a = render_mask(shape, bench_pose(), cam);
  const Mask b = render_mask(shape, shifted, cam);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mask_overlap(a, b));
  }
}
BENCHMARK(BM_MaskOverlap);

void BM_VisionScore(benchmark::State& state) {
  const CameraModel cam = bench_camera();
  const ShapePrimitive shape = ShapePrimitive::capsule(0.045, 0.30);
  const Mask observed = render_mask(shape, bench_pose(), cam);
  Pose6 probe = bench_pose();
  probe.position.y() += 0.005;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vision_score(observed, probe, shape, cam));
  }
}
BENCHMARK(BM_VisionScore);

void BM_VisionSolve(benchmark::State& state) {
  const CameraModel cam = bench_camera();
  const ShapePrimitive shape = ShapePrimitive::capsule(0.045, 0.30);
  const Mask observed = render_mask(shape, bench_pose(), cam);
  Pose6 prior = bench_pose();
  prior.position += Vec3(0.004, 0.012, -0.010);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_pose_vision(observed, prior, shape, cam));
  }
}
BENCHMARK(BM_VisionSolve);

void BM_HapticSolve(benchmark::State& state) {
  SensorModel model;
  model.range = 0.40;
  model.sigma0 = 0.0;
  const ShapePrimitive ball = ShapePrimitive::sphere(0.05);
  Pose6 truth;
  truth.position = Vec3(0.5, -0.2, 0.3);
  const Vec3 offsets[] = {Vec3(0.10, 0.0, 0.0), Vec3(-0.09, 0.02, 0.0),
                          Vec3(0.0, 0.105, 0.02), Vec3(0.01, -0.01, 0.11)};
  std::vector<SensorReading> readings;
  for (std::size_t i = 0; i < 4; ++i) {
    SensorReading r;
    r.sensor_pose = RigidTransform::translate(truth.position + offsets[i]);
    r.measurement = measure(model, r.sensor_pose, ball, truth, i);
    readings.push_back(r);
  }
  Pose6 prior;
  prior.position = truth.position + Vec3(0.02, -0.015, 0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_pose_haptic(readings, ball, prior));
  }
}
BENCHMARK(BM_HapticSolve);

void BM_ObserverCycle(benchmark::State& state) {
  ObserverState obs;
  MeasurementPair meas;
  meas.vision = bench_pose();
  meas.vision_valid = true;
  meas.vision_covariance = 0.01 * Mat6::Identity();
  meas.haptic = bench_pose();
  meas.haptic_valid = true;
  meas.haptic_covariance = 0.02 * Mat6::Identity();
  const Mat6 q = 0.5 * Mat6::Identity();
  for (auto _ : state) {
    obs = update(predict(obs, Vec6::Zero(), 1e-3, q), meas, 1e-3);
    benchmark::DoNotOptimize(obs);
  }
}
BENCHMARK(BM_ObserverCycle);

void BM_NearestSurfacePoint(benchmark::State& state) {
  const ShapePrimitive capsule = ShapePrimitive::capsule(0.045, 0.30);
  const Pose6 pose = bench_pose();
  const Vec3 probe(2.1, 0.05, 1.15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nearest_surface_point(capsule, pose, probe));
  }
}
BENCHMARK(BM_NearestSurfacePoint);

}  // namespace

BENCHMARK_MAIN();
