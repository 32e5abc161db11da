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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <utility>
#include <vector>

#include "doctest.h"
#include "occlufuse/errors.hpp"
#include "occlufuse/rng.hpp"
#include "occlufuse/sensor.hpp"

namespace occlufuse {
namespace {

TEST_SUITE_BEGIN("sensor");

TEST_CASE("response curve hits its hand-computed value") {
  SensorModel m;  // a1 = 2, a2 = 400, a3 = 0.5
  // 2 / (1 + 400 * 0.05^2) + 0.5 = 2 / 2 + 0.5
  CHECK(response(m, 0.05) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(response(m, 0.0) == doctest::Approx(m.a1 + m.a3).epsilon(1e-15));
  CHECK_THROWS_AS((void)response(m, -0.01), std::domain_error);
}

TEST_CASE("inverting the response is the identity on distance") {
  SensorModel m;
  for (int i = 0; i <= 1000; ++i) {
    const double d = i * 1e-3;
    CHECK(std::abs(invert_response(m, response(m, d)) - d) < 1e-9);
  }
}

TEST_CASE("snr of a known two-level trace") {
  SensorModel m;
  const double trace[] = {0.5, 2.5};
  // 10 * log10((2.5 - 0.5)^2 / (2 * 6.2e-6))
  CHECK(snr(m, trace) == doctest::Approx(55.08638306165727).epsilon(1e-9));
}

TEST_CASE("forearm snr decays monotonically through the 1 dB limit") {
  const SensorModel forearm = calibration_for_class("forearm");
  double prev = snr_at_distance(forearm, 0.0);
  double crossing = -1.0;
  for (int i = 1; i <= 400; ++i) {
    const double d = i * 1e-3;
    const double s = snr_at_distance(forearm, d);
    CHECK(s < prev);
    if (crossing < 0 && s < 1.0) crossing = d;
    prev = s;
  }
  REQUIRE(crossing > 0.0);
  CHECK(crossing > 0.10);
  CHECK(crossing < 0.20);
}

TEST_CASE("noise std grows quadratically from sigma0") {
  SensorModel m;
  m.sigma0 = 2e-4;
  m.noise_curvature = 400.0;
  CHECK(measurement_noise_std(m, 0.0) == doctest::Approx(2e-4));
  CHECK(measurement_noise_std(m, 0.05) ==
        doctest::Approx(2e-4 * (1 + 400 * 0.0025)).epsilon(1e-12));
}

std::vector<std::pair<double, double>> synthetic_samples(
    const SensorModel& m, int n, double noise_v, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double d = 0.002 + 0.12 * i / (n - 1.0);
    samples.emplace_back(d, response(m, d) + rng.gaussian(0.0, noise_v));
  }
  return samples;
}

TEST_CASE("fit recovers exact parameters from clean samples") {
  SensorModel truth;
  truth.a1 = 1.7;
  truth.a2 = 310.0;
  truth.a3 = 0.62;
  const auto samples = synthetic_samples(truth, 60, 0.0, 21);
  const FitResult fit = fit_params(samples);
  CHECK(fit.a1 == doctest::Approx(truth.a1).epsilon(1e-7));
  CHECK(fit.a2 == doctest::Approx(truth.a2).epsilon(1e-7));
  CHECK(fit.a3 == doctest::Approx(truth.a3).epsilon(1e-7));
  CHECK(fit.residual_rms < 1e-9);
}

TEST_CASE("fit stays within five percent under 5 mV noise") {
  SensorModel truth;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto samples = synthetic_samples(truth, 120, 5e-3, 100 + seed);
    const FitResult fit = fit_params(samples);
    CHECK(std::abs(fit.a1 - truth.a1) / truth.a1 < 0.05);
    CHECK(std::abs(fit.a2 - truth.a2) / truth.a2 < 0.05);
    CHECK(std::abs(fit.a3 - truth.a3) / truth.a3 < 0.05);
  }
}

TEST_CASE("fit rejects degenerate sample sets") {
  std::vector<std::pair<double, double>> constant = {
      {0.1, 1.0}, {0.1, 1.1}, {0.1, 0.9}, {0.1, 1.05}};
  CHECK_THROWS_AS((void)fit_params(constant), NumericalError);
  std::vector<std::pair<double, double>> narrow = {
      {0.100, 1.0}, {0.101, 1.0}, {0.102, 1.0}, {0.103, 1.0}};
  CHECK_THROWS_AS((void)fit_params(narrow), NumericalError);
  std::vector<std::pair<double, double>> few = {{0.1, 1.0}, {0.2, 0.8}};
  CHECK_THROWS_AS((void)fit_params(few), ConfigError);
}

TEST_CASE("measure reports range hits and misses") {
  SensorModel m;
  m.range = 0.15;
  RigidTransform sensor = RigidTransform::translate(Vec3(0.0, 0.0, 0.0));
  const ShapePrimitive ball = ShapePrimitive::sphere(0.05);

  Pose6 near_pose;
  near_pose.position = Vec3(0.12, 0.0, 0.0);  // surface at 0.07 m
  const auto hit = measure(m, sensor, ball, near_pose, 5);
  CHECK(hit.valid);
  CHECK(hit.noise_std > 0.0);
  CHECK(hit.offset.norm() == doctest::Approx(0.07).epsilon(0.05));

  Pose6 far_pose;
  far_pose.position = Vec3(0.40, 0.0, 0.0);  // surface at 0.35 m
  const auto miss = measure(m, sensor, ball, far_pose, 5);
  CHECK_FALSE(miss.valid);
}

TEST_CASE("measurements are deterministic per seed") {
  SensorModel m;
  const RigidTransform sensor;
  const ShapePrimitive ball = ShapePrimitive::sphere(0.05);
  Pose6 pose;
  pose.position = Vec3(0.10, 0.02, -0.01);
  const auto a = measure(m, sensor, ball, pose, 42);
  const auto b = measure(m, sensor, ball, pose, 42);
  const auto c = measure(m, sensor, ball, pose, 43);
  CHECK((a.offset - b.offset).norm() == 0.0);
  CHECK((a.offset - c.offset).norm() > 0.0);
}

TEST_CASE("calibration table round trips through a file") {
  const auto table = default_calibration();
  REQUIRE(table.size() >= 3);
  const std::string path =
      (std::filesystem::temp_directory_path() / "cal_roundtrip.json").string();
  save_calibration(path, table);
  const auto loaded = load_calibration(path);
  REQUIRE(loaded.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(loaded[i].object_class == table[i].object_class);
    CHECK(loaded[i].a1 == doctest::Approx(table[i].a1).epsilon(1e-12));
    CHECK(loaded[i].a2 == doctest::Approx(table[i].a2).epsilon(1e-12));
    CHECK(loaded[i].a3 == doctest::Approx(table[i].a3).epsilon(1e-12));
    CHECK(loaded[i].range == doctest::Approx(table[i].range).epsilon(1e-12));
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)calibration_for_class("no_such_class"), ConfigError);
}

TEST_SUITE_END();

}  // namespace
}  // namespace occlufuse
