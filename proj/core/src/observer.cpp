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

#include "occlufuse/observer.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "occlufuse/errors.hpp"

namespace occlufuse {

namespace {

bool psd_within(const Mat6& m, double tol) {
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Mat6> eig(m);
  return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() >= -tol;
}

}  // namespace

bool NoiseConfig::valid() const {
  return psd_within(process, 1e-9) && psd_within(vision_weight, 1e-9) &&
         haptic_sigma2_near > 0 && haptic_growth_exponent > 0 &&
         haptic_curve_range > 0 && omega_n > 0 && zeta > 0;
}

ObserverState predict(const ObserverState& state, const Vec6& u, double dt,
                      const Mat6& process) {
  if (!(dt > 0.0)) throw std::invalid_argument("predict: dt must be positive");
  if (!u.allFinite()) throw std::invalid_argument("predict: non-finite rate");
  ObserverState next = state;
  next.estimate = Pose6::from_vector(state.estimate.vector() + u * dt).wrapped();
  next.covariance += process * dt;
  next.time = state.time + dt;
  return next;
}

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& C, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("riccati_step: dt must be positive");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
  if (!lu.isInvertible())
    throw NumericalError("riccati_step: singular measurement covariance");

  const Eigen::MatrixXd CP = C * P;
  Eigen::MatrixXd next =
      P + dt * (A * P + P * A.transpose() + Q - CP.transpose() * lu.solve(CP));
  if (next.cwiseAbs().maxCoeff() > 1e9)
    throw NumericalError("riccati_step: covariance blew up, dt too large");

  next = 0.5 * (next + next.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(next);
  if (eig.info() != Eigen::Success)
    throw NumericalError("riccati_step: eigendecomposition failed");
  const Eigen::VectorXd floored = eig.eigenvalues().cwiseMax(0.0);
  next = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (next + next.transpose()).eval();
}

Eigen::MatrixXd gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& C,
                     const Eigen::MatrixXd& R) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
  if (!lu.isInvertible()) throw NumericalError("gain: singular measurement covariance");
  return P * C.transpose() * lu.inverse();
}

ObserverState update(const ObserverState& state, const MeasurementPair& meas,
                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("update: dt must be positive");
  if (!meas.vision_valid && !meas.haptic_valid)
    throw std::invalid_argument("update: both modalities invalid");

  const Mat6 sentinel = kUnobservableVariance * Mat6::Identity();
  const Mat6& r_v = meas.vision_valid ? meas.vision_covariance : sentinel;
  const Mat6& r_c = meas.haptic_valid ? meas.haptic_covariance : sentinel;

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(12, 12);
  R.topLeftCorner<6, 6>() = r_v;
  R.bottomRightCorner<6, 6>() = r_c;

  Eigen::MatrixXd C(12, 6);
  C.topRows<6>() = Mat6::Identity();
  C.bottomRows<6>() = Mat6::Identity();

  Eigen::VectorXd z(12);
  z.head<6>() = pose_error(meas.vision, state.estimate);
  z.tail<6>() = pose_error(meas.haptic, state.estimate);

  const Eigen::MatrixXd K = gain(state.covariance, C, R);

  ObserverState next = state;
  next.estimate =
      Pose6::from_vector(state.estimate.vector() + K * z * dt).wrapped();
  next.covariance = riccati_step(state.covariance, Mat6::Zero(), C,
                                 Mat6::Zero(), R, dt);
  return next;
}

Mat6 compute_R_v(double occlusion, const Mat6& W_v) {
  if (!(occlusion >= 0.0 && occlusion <= 1.0))
    throw std::invalid_argument("compute_R_v: occlusion fraction outside [0,1]");
  return occlusion * W_v;
}

Mat6 compute_R_v(const Mask& predicted, const Mask& observed, const Mat6& W_v) {
  // occlusion_fraction is the single source of truth for the scalar, so the
  // covariance scale and the harness's logged fraction can never diverge.
  return compute_R_v(occlusion_fraction(predicted, observed), W_v);
}

Mat6 compute_R_c(const Pose6& estimate, std::span<const RigidTransform> sensors,
                 const NoiseConfig& config) {
  if (sensors.empty())
    throw std::invalid_argument("compute_R_c: no sensor poses");

  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : sensors)
    d = std::min(d, (estimate.position - s.translation).norm());

  Vec6 diag = Vec6::Constant(kUnobservableVariance);
  if (d <= config.haptic_curve_range) {
    const double sigma2 =
        config.haptic_sigma2_near *
        (1.0 + std::pow(d / config.haptic_curve_range,
                        config.haptic_growth_exponent));
    diag[0] = diag[1] = diag[2] = sigma2;
    for (int i = 0; i < 3; ++i)
      if (config.haptic_attitude_observable[i]) diag[3 + i] = sigma2;
  }
  return diag.asDiagonal();
}

Pose6 lowpass(ObserverState& state, const Pose6& raw_pose, double dt,
              const NoiseConfig& config) {
  if (!(dt > 0.0)) throw std::invalid_argument("lowpass: dt must be positive");
  if (config.omega_n * dt >= 1.0)
    throw NumericalError("lowpass: omega_n * dt >= 1, discretization unstable");

  // Bilinear transform of wn^2 / (s^2 + 2 zeta wn s + wn^2).
  const double wn = config.omega_n, zt = config.zeta;
  const double K = 2.0 / dt;
  const double den = K * K + 2.0 * zt * wn * K + wn * wn;
  const double b0 = wn * wn / den;
  const double b1 = 2.0 * wn * wn / den;
  const double b2 = wn * wn / den;
  const double a1 = (2.0 * wn * wn - 2.0 * K * K) / den;
  const double a2 = (K * K - 2.0 * zt * wn * K + wn * wn) / den;

  // Unwrap attitude inputs onto the filter's continuous track.
  Vec6 x = raw_pose.vector();
  if (state.lpf_primed)
    for (int i = 3; i < 6; ++i)
      x[i] = state.lpf_input[i] + wrap_angle(x[i] - state.lpf_input[i]);

  if (!state.lpf_primed) {
    // Steady-state memory for a constant input: the stream starts settled.
    for (int i = 0; i < 6; ++i) {
      const double s2 = (b2 - a2) * x[i];
      state.lpf_state(1, i) = s2;
      state.lpf_state(0, i) = (b1 - a1) * x[i] + s2;
    }
    state.lpf_primed = true;
  }
  state.lpf_input = x;

  Vec6 y;
  for (int i = 0; i < 6; ++i) {
    y[i] = b0 * x[i] + state.lpf_state(0, i);
    state.lpf_state(0, i) = b1 * x[i] - a1 * y[i] + state.lpf_state(1, i);
    state.lpf_state(1, i) = b2 * x[i] - a2 * y[i];
  }

  Pose6 out = Pose6::from_vector(y);
  out.attitude = Vec3(wrap_angle(y[3]), wrap_angle(y[4]), wrap_angle(y[5]));
  return out;
}

}  // namespace occlufuse
