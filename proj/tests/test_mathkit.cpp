// Copyright 2026 The EMFF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <limits>

#include "emff/errors.hpp"
#include "emff/mathkit.hpp"
#include "test_support.hpp"

namespace emff {
namespace {

using testing::Sampler;

// Independent attitude oracle: unit quaternion q with C^{I/B} = R(q).
Eigen::Quaterniond quat_from_mrp(const Mrp& s) {
  const double s2 = s.squaredNorm();
  const double w = (1.0 - s2) / (1.0 + s2);
  const Vec3 v = 2.0 * s / (1.0 + s2);
  return Eigen::Quaterniond(w, v.x(), v.y(), v.z());
}

Mrp mrp_from_quat(Eigen::Quaterniond q) {
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q.vec() / (1.0 + q.w());
}

Eigen::Quaterniond quat_step(const Eigen::Quaterniond& q, const Vec3& omega_body, double dt) {
  // Constant body rate: exact update by right multiplication.
  const double a = omega_body.norm() * dt;
  Eigen::Quaterniond dq = Eigen::Quaterniond::Identity();
  if (a != 0.0) dq = Eigen::Quaterniond(Eigen::AngleAxisd(a, omega_body.normalized()));
  return (q * dq).normalized();
}

TEST(Tilde, Examples) {
  EXPECT_TRUE(tilde(Vec3::Zero()).isZero(0.0));
  EXPECT_TRUE((tilde(Vec3::UnitX()) * Vec3::UnitY()).isApprox(Vec3::UnitZ()));
  Sampler s(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = s.vec(10.0);
    EXPECT_LT((tilde(a) * a).norm(), 1e-12);
  }
}

TEST(Tilde, SkewProperties) {
  Sampler s(2);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a = s.vec(5.0), b = s.vec(5.0);
    EXPECT_LT((tilde(a) * b + tilde(b) * a).norm(), 1e-12);
    EXPECT_TRUE((tilde(a) + tilde(a).transpose()).isZero(0.0));
    EXPECT_LT((tilde(a) * b - a.cross(b)).norm(), 1e-12);
  }
}

TEST(MrpKinematics, Examples) {
  EXPECT_TRUE(mrp_kinematics(Vec3::Zero(), Vec3(0.4, 0.0, 0.0)).isApprox(Vec3(0.1, 0.0, 0.0)));
  EXPECT_TRUE(mrp_kinematics(Vec3::Zero(), Vec3::Zero()).isZero(0.0));
}

TEST(MrpKinematics, MatchesQuaternionPropagation) {
  Sampler s(3);
  const double eps = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const Mrp sigma = 0.5 * s.unit();
    const Vec3 omega = s.vec(0.5);
    const Eigen::Quaterniond q = quat_from_mrp(sigma);
    const Mrp fwd = mrp_from_quat(quat_step(q, omega, eps));
    const Mrp bwd = mrp_from_quat(quat_step(q, omega, -eps));
    const Vec3 fd = (fwd - bwd) / (2.0 * eps);
    EXPECT_LT((fd - mrp_kinematics(sigma, omega)).norm(), 1e-6) << "trial " << i;
  }
}

TEST(MrpKinematics, ZIsInvertibleInsideUnitBall) {
  Sampler s(4);
  for (int i = 0; i < 500; ++i) {
    const Mrp sigma = s.mrp(1.0);
    Eigen::JacobiSVD<Mat3> svd(mrp_z_matrix(sigma));
    EXPECT_GT(svd.singularValues().minCoeff(), 0.1);
  }
  Eigen::JacobiSVD<Mat3> edge(mrp_z_matrix(Vec3::UnitX()));
  EXPECT_GT(edge.singularValues().minCoeff(), 0.0);
}

TEST(MrpShadow, Examples) {
  EXPECT_TRUE(mrp_shadow_switch(Vec3(2.0, 0.0, 0.0)).isApprox(Vec3(-0.5, 0.0, 0.0)));
  const Vec3 in(0.3, 0.4, 0.0);
  EXPECT_EQ(mrp_shadow_switch(in), in);
  // The switch is strict at the unit sphere.
  EXPECT_EQ(mrp_shadow_switch(Vec3::UnitY()), Vec3::UnitY());
}

TEST(MrpShadow, SameAttitudeAndIdempotent) {
  Sampler s(5);
  for (int i = 0; i < 200; ++i) {
    const Mrp big = s.unit() * s.uniform(1.01, 20.0);
    const Mrp sw = mrp_shadow_switch(big);
    EXPECT_LE(sw.norm(), 1.0);
    EXPECT_LT((mrp_to_dcm(big) - mrp_to_dcm(sw)).norm(), 1e-12);
    EXPECT_EQ(mrp_shadow_switch(sw), sw);
  }
}

TEST(Dcm, IdentityAndOrthonormal) {
  EXPECT_TRUE(mrp_to_dcm(Vec3::Zero()).isApprox(Mat3::Identity()));
  Sampler s(6);
  for (int i = 0; i < 200; ++i) {
    const Dcm c = mrp_to_dcm(s.mrp(1.0));
    EXPECT_LT((c.transpose() * c - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(c.determinant(), 1.0, 1e-12);
  }
}

TEST(Dcm, MatchesQuaternionRotation) {
  Sampler s(7);
  for (int i = 0; i < 100; ++i) {
    const Mrp sigma = s.mrp(1.0);
    const Mat3 oracle = quat_from_mrp(sigma).toRotationMatrix();
    EXPECT_LT((mrp_to_dcm(sigma) - oracle).norm(), 1e-12);
  }
}

TEST(Dcm, RoundTrip) {
  Sampler s(8);
  for (int i = 0; i < 500; ++i) {
    const Dcm c = mrp_to_dcm(s.mrp(1.0));
    const Mrp back = dcm_to_mrp(c);
    EXPECT_LE(back.norm(), 1.0 + 1e-12);
    EXPECT_LT((mrp_to_dcm(back) - c).norm(), 1e-10);
  }
  // Half turn sits on the unit sphere.
  const Dcm half = mrp_to_dcm(Vec3::UnitZ());
  EXPECT_LT((mrp_to_dcm(dcm_to_mrp(half)) - half).norm(), 1e-10);
}

TEST(Dcm, DerivativeMatchesFiniteDifference) {
  Sampler s(9);
  const double eps = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const Mrp sigma = s.mrp(0.8);
    const Vec3 omega = s.vec(0.3);
    auto fwd_rate = [&](const VecX& x) -> VecX { return mrp_kinematics(x, omega); };
    auto back_rate = [&](const VecX& x) -> VecX { return mrp_kinematics(x, -omega); };
    const Mrp fwd = rk4_step(sigma, fwd_rate, eps);
    const Mrp back = rk4_step(sigma, back_rate, eps);
    const Mat3 fd = (mrp_to_dcm(fwd) - mrp_to_dcm(back)) / (2.0 * eps);
    const Dcm c = mrp_to_dcm(sigma);
    EXPECT_LT((fd - dcm_derivative(c, omega)).norm(), 1e-8);
    EXPECT_TRUE(dcm_derivative(c, omega).isApprox(c * tilde(omega)));
  }
}

TEST(Rk4, Examples) {
  const VecX x0 = VecX::Constant(3, 1.5);
  EXPECT_EQ(rk4_step(x0, [](const VecX& x) -> VecX { return VecX::Zero(x.size()); }, 0.1), x0);
  const VecX one = VecX::Ones(1);
  const VecX x1 = rk4_step(one, [](const VecX& x) -> VecX { return x; }, 0.1);
  const double taylor = 1.0 + 0.1 + 0.005 + 0.1 * 0.1 * 0.1 / 6.0 + 0.1 * 0.1 * 0.1 * 0.1 / 24.0;
  EXPECT_NEAR(x1(0), taylor, 1e-15);
  EXPECT_NEAR(x1(0), 1.105170833, 1e-9);
}

TEST(Rk4, TimeDependentForm) {
  // x' = t from t = 2: exact for a polynomial of degree <= 4.
  const VecX x = rk4_step(VecX::Zero(1), 2.0, [](double t, const VecX&) -> VecX { return VecX::Constant(1, t * t * t); }, 0.5);
  EXPECT_NEAR(x(0), (std::pow(2.5, 4) - std::pow(2.0, 4)) / 4.0, 1e-12);
}

double oscillator_error(double dt) {
  VecX x(2);
  x << 1.0, 0.0;
  const int steps = static_cast<int>(std::lround(10.0 / dt));
  auto f = [](const VecX& y) -> VecX {
    VecX d(2);
    d << y(1), -y(0);
    return d;
  };
  for (int i = 0; i < steps; ++i) x = rk4_step(x, f, dt);
  return std::hypot(x(0) - std::cos(10.0), x(1) + std::sin(10.0));
}

TEST(Rk4, FourthOrderConvergence) {
  const double ratio = oscillator_error(0.1) / oscillator_error(0.05);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Rk4, Errors) {
  const VecX x = VecX::Ones(2);
  auto nan = [](const VecX& y) -> VecX {
    return VecX::Constant(y.size(), std::numeric_limits<double>::quiet_NaN());
  };
  EXPECT_THROW(rk4_step(x, nan, 0.1), IntegrationError);
  EXPECT_THROW(rk4_step(x, [](const VecX& y) -> VecX { return y; }, 0.0), InvalidArgument);
  EXPECT_THROW(rk4_step(x, [](const VecX&) -> VecX { return VecX::Ones(3); }, 0.1), DimensionError);
}

TEST(Shapes, MismatchIsAnError) {
  EXPECT_THROW(require_same_size(VecX::Ones(2), VecX::Ones(3), "test"), DimensionError);
  EXPECT_NO_THROW(require_same_size(VecX::Ones(3), VecX::Ones(3), "test"));
  EXPECT_THROW(require_shape(MatX::Zero(2, 3), 3, 2, "test"), DimensionError);
}

}  // namespace
}  // namespace emff
