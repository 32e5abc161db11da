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

#include "occlufuse/haptic.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "occlufuse/errors.hpp"

namespace occlufuse {

bool KinematicChain::valid() const {
  for (const auto& l : links)
    if (!l.axis.allFinite() || l.axis.norm() < 1e-12 || !l.offset.is_rotation(1e-6))
      return false;
  for (const auto& m : mounts)
    if (m.link < 0 || m.link >= static_cast<int>(links.size()) ||
        !m.offset.is_rotation(1e-6))
      return false;
  return base.is_rotation(1e-6);
}

std::vector<RigidTransform> forward_kinematics(const KinematicChain& chain,
                                               std::span<const double> theta) {
  if (theta.size() != chain.links.size())
    throw std::invalid_argument("forward_kinematics: joint angle count mismatch");
  for (double t : theta)
    if (!std::isfinite(t))
      throw std::invalid_argument("forward_kinematics: non-finite joint angle");
  if (!chain.valid())
    throw std::invalid_argument("forward_kinematics: invalid chain");

  std::vector<RigidTransform> link_world(chain.links.size());
  RigidTransform t = chain.base;
  for (std::size_t i = 0; i < chain.links.size(); ++i) {
    const auto& link = chain.links[i];
    RigidTransform joint{
        Eigen::AngleAxisd(theta[i], link.axis.normalized()).toRotationMatrix(),
        Vec3::Zero()};
    t = t.compose(link.offset).compose(joint);
    link_world[i] = t;
  }

  std::vector<RigidTransform> out;
  out.reserve(chain.mounts.size());
  for (const auto& m : chain.mounts)
    out.push_back(link_world[m.link].compose(m.offset));
  return out;
}

namespace {

// Stacked 3-vector residuals: fitted nearest point minus measured point.
Eigen::VectorXd solve_residuals(const ShapePrimitive& shape, const Pose6& pose,
                                const std::vector<const SensorReading*>& used) {
  Eigen::VectorXd r(3 * used.size());
  for (std::size_t s = 0; s < used.size(); ++s) {
    const Vec3 origin = used[s]->sensor_pose.translation;
    const Vec3 target = origin + used[s]->measurement.offset;
    r.segment<3>(3 * s) = nearest_surface_point(shape, pose, origin) - target;
  }
  return r;
}

// Number of pose directions the shape's symmetry makes unobservable when
// solving all six parameters.
int structural_null_count(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Capsule:
    case ShapeKind::Cylinder:
      return 1;  // spin about the symmetry axis
    default:
      return 0;
  }
}

}  // namespace

HapticPoseEstimate estimate_pose_haptic(std::span<const SensorReading> readings,
                                        const ShapePrimitive& shape,
                                        const Pose6& prior, HapticMode mode) {
  if (!shape.valid())
    throw std::invalid_argument("estimate_pose_haptic: invalid shape");
  if (!prior.finite())
    throw std::invalid_argument("estimate_pose_haptic: non-finite prior");

  std::vector<const SensorReading*> used;
  for (const auto& r : readings)
    if (r.measurement.valid) used.push_back(&r);
  const int n = static_cast<int>(used.size());

  // A sphere's attitude is never observable, so a full solve degenerates to
  // a position solve with the attitude held at the prior.
  const bool solve_attitude =
      mode == HapticMode::Full6DoF && shape.kind != ShapeKind::Sphere;
  const int k = solve_attitude ? 6 : 3;

  if (mode == HapticMode::Full6DoF && n < 3)
    throw std::invalid_argument(
        "estimate_pose_haptic: full 6-DoF needs at least 3 valid readings");
  if (n < 1)
    throw std::invalid_argument("estimate_pose_haptic: no valid readings");

  Vec6 x = prior.wrapped().vector();
  auto cost_at = [&](const Vec6& v) {
    return solve_residuals(shape, Pose6::from_vector(v), used).squaredNorm();
  };

  double cost = cost_at(x);
  double lambda = 1e-3;
  constexpr int kMaxIterations = 50;
  constexpr double kStepTol = 1e-7;
  const double fd_step = 1e-6;

  bool converged = false;
  int iter = 0;
  Eigen::MatrixXd jtj_final = Eigen::MatrixXd::Zero(k, k);
  for (; iter < kMaxIterations && !converged; ++iter) {
    Eigen::VectorXd r = solve_residuals(shape, Pose6::from_vector(x), used);
    Eigen::MatrixXd jac(3 * n, k);
    for (int j = 0; j < k; ++j) {
      Vec6 hi = x, lo = x;
      hi[j] += fd_step;
      lo[j] -= fd_step;
      jac.col(j) = (solve_residuals(shape, Pose6::from_vector(hi), used) -
                    solve_residuals(shape, Pose6::from_vector(lo), used)) /
                   (2.0 * fd_step);
    }
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd jtr = jac.transpose() * r;
    jtj_final = jtj;

    bool stepped = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      Eigen::MatrixXd damped =
          jtj + lambda * Eigen::MatrixXd::Identity(k, k);
      Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      Vec6 cand = x;
      for (int j = 0; j < k; ++j) cand[j] += step[j];
      double c = cost_at(cand);
      if (c <= cost) {
        x = cand;
        cost = c;
        lambda = std::max(lambda / 10.0, 1e-15);
        stepped = true;
        if (step.norm() < kStepTol) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No improving step at any damping level: with noisy measurements the
      // residual gradient never vanishes, so stagnation is the minimum.
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError(
        "estimate_pose_haptic: no convergence within iteration budget");

  const Pose6 solution = Pose6::from_vector(x).wrapped();

  // Residual variance, floored at the measurement noise so that noise-free
  // fits still report the geometry's information content.
  double noise_floor = 0.0;
  for (const auto* u : used)
    noise_floor += u->measurement.noise_std * u->measurement.noise_std;
  noise_floor /= n;
  const int dof = std::max(3 * n - k, 1);
  const double s2 = std::max(cost / dof, noise_floor);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jtj_final);
  if (eig.info() != Eigen::Success)
    throw NumericalError("estimate_pose_haptic: eigendecomposition failed");
  const Eigen::VectorXd& lambda_sorted = eig.eigenvalues();  // ascending
  const int nullity = solve_attitude ? structural_null_count(shape.kind) : 0;
  const double lambda_max = lambda_sorted[k - 1];
  if (!(lambda_max > 0.0) ||
      lambda_sorted[nullity] < lambda_max / 1e12)
    throw NumericalError("estimate_pose_haptic: degenerate sensor geometry");

  Mat6 cov = Mat6::Zero();
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(i);
    Mat6 outer = Mat6::Zero();
    outer.topLeftCorner(k, k) = v * v.transpose();
    if (i < nullity)
      cov += kUnobservableVariance * outer;
    else
      cov += (s2 / lambda_sorted[i]) * outer;
  }
  if (!solve_attitude)
    for (int i = 3; i < 6; ++i) cov(i, i) = kUnobservableVariance;
  cov = 0.5 * (cov + cov.transpose()).eval();

  HapticPoseEstimate est;
  est.pose = solution;
  est.residual_rms = std::sqrt(cost / n);
  est.covariance = cov;
  est.n_measurements = n;
  est.iterations = iter;
  return est;
}

}  // namespace occlufuse
