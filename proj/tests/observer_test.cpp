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
#include <numbers>

#include "doctest.h"
#include "occlufuse/errors.hpp"
#include "occlufuse/mask.hpp"
#include "occlufuse/observer.hpp"
#include "occlufuse/rng.hpp"

namespace occlufuse {
namespace {

constexpr double kPi = std::numbers::pi;

TEST_SUITE_BEGIN("observer");

TEST_CASE("predict leaves the estimate alone and inflates covariance") {
  ObserverState st;
  st.estimate.position = Vec3(1.0, 2.0, 3.0);
  const Mat6 q = 0.5 * Mat6::Identity();
  const double dt = 1e-3;
  ObserverState next = st;
  const int steps = 100;
  for (int i = 0; i < steps; ++i) next = predict(next, Vec6::Zero(), dt, q);
  CHECK((next.estimate.vector() - st.estimate.vector()).norm() == 0.0);
  CHECK(next.covariance.trace() ==
        doctest::Approx(st.covariance.trace() + steps * dt * q.trace())
            .epsilon(1e-12));
  CHECK(next.time == doctest::Approx(steps * dt));
}

TEST_CASE("scalar covariance flow settles at sqrt(Q*R)") {
  // With A = 0 and C = 1 the stationary point of dP/dt = Q - P^2/R is
  // exactly sqrt(Q*R), independent of the Euler step size.
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd q(1, 1), r(1, 1), p(1, 1);
  q << 0.04;
  r << 0.01;
  p << 1.0;
  const double dt = 1e-3;
  for (int i = 0; i < 200000; ++i) p = riccati_step(p, a, c, q, r, dt);
  CHECK(p(0, 0) == doctest::Approx(0.02).epsilon(1e-9));  // sqrt(0.04*0.01)
}

TEST_CASE("riccati steps keep the covariance symmetric and PSD") {
  Rng rng(41);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(6, 6) * 0.01;
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
  Eigen::MatrixXd c(12, 6);
  c << Eigen::MatrixXd::Identity(6, 6), Eigen::MatrixXd::Identity(6, 6);
  for (int i = 0; i < 10000; ++i) {
    Eigen::MatrixXd g(6, 6);
    for (int rr = 0; rr < 6; ++rr)
      for (int cc = 0; cc < 6; ++cc) g(rr, cc) = rng.gaussian(0, 1);
    const Eigen::MatrixXd q = g * g.transpose() * 0.1;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(12, 12);
    for (int d = 0; d < 12; ++d) r(d, d) = 0.05 + rng.uniform();
    p = riccati_step(p, a, c, q, r, 1e-3);
    CHECK((p - p.transpose()).norm() == 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("gain splits into the expected modality blocks") {
  Eigen::MatrixXd c(12, 6);
  c << Eigen::MatrixXd::Identity(6, 6), Eigen::MatrixXd::Identity(6, 6);

  const double pval = 0.3;
  const double sigma2 = 0.02;
  const Eigen::MatrixXd p = pval * Eigen::MatrixXd::Identity(6, 6);
  const Eigen::MatrixXd r = sigma2 * Eigen::MatrixXd::Identity(12, 12);
  const Eigen::MatrixXd k = gain(p, c, r);
  REQUIRE(k.rows() == 6);
  REQUIRE(k.cols() == 12);
  CHECK((k.leftCols(6) - (pval / sigma2) * Eigen::MatrixXd::Identity(6, 6))
            .norm() < 1e-12);
  CHECK((k.rightCols(6) - (pval / sigma2) * Eigen::MatrixXd::Identity(6, 6))
            .norm() < 1e-12);

  // Sentinel-weighted haptic block collapses relative to the vision block.
  Eigen::MatrixXd r_mixed = Eigen::MatrixXd::Identity(12, 12);
  r_mixed.topLeftCorner(6, 6) *= sigma2;
  r_mixed.bottomRightCorner(6, 6) *= kUnobservableVariance;
  const Eigen::MatrixXd k_mixed = gain(p, c, r_mixed);
  CHECK(k_mixed.rightCols(6).norm() < 1e-4 * k_mixed.leftCols(6).norm());

  CHECK(gain(Eigen::MatrixXd::Zero(6, 6), c, r).norm() == 0.0);
  CHECK_THROWS_AS((void)gain(p, c, Eigen::MatrixXd::Zero(12, 12)),
                  NumericalError);
}

MeasurementPair vision_only_meas(const Pose6& y, double sigma2) {
  MeasurementPair m;
  m.vision = y;
  m.vision_valid = true;
  m.vision_covariance = sigma2 * Mat6::Identity();
  return m;
}

TEST_CASE("zero innovation leaves the estimate fixed") {
  ObserverState st;
  st.estimate.position = Vec3(0.5, -0.5, 0.25);
  st.estimate.attitude = Vec3(0.1, 0.0, -0.2);
  MeasurementPair m = vision_only_meas(st.estimate, 0.01);
  m.haptic = st.estimate;
  m.haptic_valid = true;
  m.haptic_covariance = 0.02 * Mat6::Identity();
  const ObserverState next = update(st, m, 1e-3);
  CHECK((next.estimate.vector() - st.estimate.vector()).norm() < 1e-15);
}

TEST_CASE("update rejects a frame with no valid modality") {
  ObserverState st;
  MeasurementPair m;
  CHECK_THROWS_AS((void)update(st, m, 1e-3), std::invalid_argument);
}

TEST_CASE("sentinel haptic weight reproduces the vision-only update") {
  Pose6 y;
  y.position = Vec3(0.8, 0.1, -0.3);
  y.attitude = Vec3(0.05, -0.1, 0.2);

  ObserverState with_sentinel;
  MeasurementPair both = vision_only_meas(y, 0.01);
  both.haptic = Pose6{};  // wildly different claim, weighted at the sentinel
  both.haptic_valid = true;
  both.haptic_covariance = kUnobservableVariance * Mat6::Identity();

  ObserverState vision_only;
  const MeasurementPair single = vision_only_meas(y, 0.01);

  for (int i = 0; i < 50; ++i) {
    with_sentinel = update(with_sentinel, both, 1e-3);
    vision_only = update(vision_only, single, 1e-3);
  }
  CHECK((with_sentinel.estimate.vector() - vision_only.estimate.vector())
            .lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("attitude innovation wraps across the seam") {
  ObserverState st;
  st.estimate.attitude = Vec3(0.0, 0.0, 3.1);
  Pose6 y;
  y.attitude = Vec3(0.0, 0.0, -3.1);  // 0.083 rad away through the seam
  const ObserverState next = update(st, vision_only_meas(y, 1e-4), 1e-2);
  // The estimate must move toward the seam (yaw increasing past pi wraps
  // negative), never the long way around through zero.
  const double moved = wrap_angle(next.estimate.attitude.z() - 3.1);
  CHECK(moved > 0.0);
  CHECK(moved < 0.09);
}

TEST_CASE("fused steady-state error beats either single modality") {
  // Static truth, both modalities unbiased and noisy: the two-measurement
  // filter must do at least as well as the better single stream.
  const Pose6 truth = [] {
    Pose6 p;
    p.position = Vec3(0.3, -0.2, 0.7);
    return p;
  }();
  const double sv = 0.04;   // vision noise variance
  const double sc = 0.02;   // haptic noise variance
  double fused_sq = 0.0, vis_sq = 0.0, hap_sq = 0.0;
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(900 + seed);
    ObserverState fused, vis, hap;
    fused.estimate = truth;
    vis.estimate = truth;
    hap.estimate = truth;
    for (int step = 0; step < 500; ++step) {
      Pose6 yv = truth, yh = truth;
      for (int a = 0; a < 3; ++a) {
        yv.position[a] += rng.gaussian(0, std::sqrt(sv));
        yh.position[a] += rng.gaussian(0, std::sqrt(sc));
      }
      MeasurementPair both = vision_only_meas(yv, sv);
      both.haptic = yh;
      both.haptic_valid = true;
      both.haptic_covariance = sc * Mat6::Identity();
      fused = update(predict(fused, Vec6::Zero(), 1e-3, Mat6::Identity()),
                     both, 1e-3);
      vis = update(predict(vis, Vec6::Zero(), 1e-3, Mat6::Identity()),
                   vision_only_meas(yv, sv), 1e-3);
      MeasurementPair donly;
      donly.haptic = yh;
      donly.haptic_valid = true;
      donly.haptic_covariance = sc * Mat6::Identity();
      hap = update(predict(hap, Vec6::Zero(), 1e-3, Mat6::Identity()),
                   donly, 1e-3);
    }
    fused_sq += (fused.estimate.position - truth.position).squaredNorm();
    vis_sq += (vis.estimate.position - truth.position).squaredNorm();
    hap_sq += (hap.estimate.position - truth.position).squaredNorm();
  }
  // The population inequality is strict (the fused stationary variance is
  // below both single-modality ones by ~20%); the 5% slack only absorbs
  // Monte-Carlo sampling noise.
  CHECK(fused_sq / seeds <= 1.05 * std::min(vis_sq, hap_sq) / seeds);
}

TEST_CASE("vision covariance scales linearly with the hidden fraction") {
  const Mat6 w = Mat6::Identity() * 8.0;
  CHECK(compute_R_v(0.0, w).norm() == 0.0);
  CHECK((compute_R_v(0.4, w) - 0.4 * w).norm() < 1e-12);
  CHECK((compute_R_v(1.0, w) - w).norm() < 1e-12);

  Mask predicted = Mask::zeros(10, 10);
  for (int i = 0; i < 50; ++i) predicted.labels[i] = 1;
  Mask observed = predicted;
  for (int i = 0; i < 20; ++i) observed.labels[i] = 0;
  CHECK((compute_R_v(predicted, observed, w) - 0.4 * w).norm() < 1e-12);
  const Mask none = Mask::zeros(10, 10);
  CHECK((compute_R_v(predicted, none, w) - w).norm() < 1e-12);
  CHECK_THROWS_AS((void)compute_R_v(none, none, w), NumericalError);
}

TEST_CASE("haptic covariance follows the distance curve to the sentinel") {
  NoiseConfig cfg;
  const double s2 = cfg.haptic_sigma2_near;
  const double range = cfg.haptic_curve_range;
  const RigidTransform sensors[] = {
      RigidTransform::translate(Vec3(1.0, 0.0, 0.0))};

  Pose6 at_contact;
  at_contact.position = Vec3(1.0, 0.0, 0.0);
  const Mat6 r0 = compute_R_c(at_contact, sensors, cfg);
  CHECK(r0(0, 0) == doctest::Approx(s2).epsilon(1e-12));
  CHECK(r0(3, 3) == doctest::Approx(s2).epsilon(1e-12));
  // Yaw is flagged unobservable by default and pinned at the sentinel.
  CHECK(r0(5, 5) == doctest::Approx(kUnobservableVariance));

  Pose6 at_range;
  at_range.position = Vec3(1.0 + range, 0.0, 0.0);
  const Mat6 r1 = compute_R_c(at_range, sensors, cfg);
  CHECK(r1(0, 0) == doctest::Approx(2.0 * s2).epsilon(1e-9));

  Pose6 far;
  far.position = Vec3(1.0 + 2.0 * range, 0.0, 0.0);
  const Mat6 r2 = compute_R_c(far, sensors, cfg);
  CHECK(r2(0, 0) == doctest::Approx(kUnobservableVariance));

  // The nearest of several sensors drives the curve.
  const RigidTransform pair[] = {
      RigidTransform::translate(Vec3(1.0, 0.0, 0.0)),
      RigidTransform::translate(Vec3(5.0, 0.0, 0.0))};
  const Mat6 rn = compute_R_c(at_contact, pair, cfg);
  CHECK(rn(0, 0) == doctest::Approx(s2).epsilon(1e-12));
}

TEST_CASE("lowpass passes DC and settles within the canonical time") {
  NoiseConfig cfg;
  ObserverState st;
  Pose6 target;
  target.position = Vec3(0.5, -0.25, 1.0);
  const double dt = 1e-4;
  // Prime on a zero pose, then step to the constant target.
  Pose6 out = lowpass(st, Pose6{}, dt, cfg);
  const double settle = 5.0 / (cfg.zeta * cfg.omega_n);
  const int steps = static_cast<int>(settle / dt);
  for (int i = 0; i < steps; ++i) out = lowpass(st, target, dt, cfg);
  CHECK(std::abs(out.position.x() - target.position.x()) <
        0.01 * std::abs(target.position.x()));
}

TEST_CASE("zero input from zero state stays at zero") {
  NoiseConfig cfg;
  ObserverState st;
  Pose6 out;
  for (int i = 0; i < 100; ++i) out = lowpass(st, Pose6{}, 1e-4, cfg);
  CHECK(out.position.norm() == 0.0);
  CHECK(out.attitude.norm() == 0.0);
}

TEST_CASE("corner frequency sits 3 dB down within five percent") {
  NoiseConfig cfg;  // omega_n = 120*pi, zeta = 1/sqrt(2) -> -3 dB at 60 Hz
  ObserverState st;
  const double dt = 1e-4;
  const double f = 60.0;
  const double amp = 0.01;
  double peak = 0.0;
  const int steps = static_cast<int>(1.0 / dt);
  for (int i = 0; i < steps; ++i) {
    const double t = i * dt;
    Pose6 in;
    in.position.x() = amp * std::sin(2 * kPi * f * t);
    const Pose6 out = lowpass(st, in, dt, cfg);
    if (t > 0.7) peak = std::max(peak, std::abs(out.position.x()));
  }
  const double expected = amp / std::sqrt(2.0);
  CHECK(peak == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("lowpass filters attitude on the unwrapped signal") {
  NoiseConfig cfg;
  ObserverState st;
  // A yaw dithering across the +/- pi seam must filter like a continuous
  // small oscillation around pi, not swing through zero.
  Pose6 out;
  for (int i = 0; i < 2000; ++i) {
    Pose6 in;
    in.attitude.z() = wrap_angle(kPi + 0.05 * std::sin(i * 0.01));
    out = lowpass(st, in, 1e-4, cfg);
  }
  CHECK(std::abs(wrap_angle(out.attitude.z() - kPi)) < 0.06);
}

TEST_CASE("too coarse a step for the corner frequency is rejected") {
  NoiseConfig cfg;
  ObserverState st;
  CHECK_THROWS_AS((void)lowpass(st, Pose6{}, 1.0 / cfg.omega_n + 3e-3, cfg),
                  NumericalError);
}

TEST_SUITE_END();

}  // namespace
}  // namespace occlufuse
