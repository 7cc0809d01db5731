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
#include "emff/mathkit.hpp"

#include <Eigen/Geometry>
#include <string>

#include "emff/errors.hpp"

namespace emff {

Mat3 tilde(const Vec3& a) {
  Mat3 t;
  t << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return t;
}

Mat3 mrp_z_matrix(const Mrp& sigma) {
  const double s2 = sigma.squaredNorm();
  return 0.25 * ((1.0 - s2) * Mat3::Identity() + 2.0 * tilde(sigma) +
                 2.0 * sigma * sigma.transpose());
}

Vec3 mrp_kinematics(const Mrp& sigma, const Vec3& omega_body) {
  return mrp_z_matrix(sigma) * omega_body;
}

Mrp mrp_shadow(const Mrp& sigma) { return -sigma / sigma.squaredNorm(); }

Mrp mrp_shadow_switch(const Mrp& sigma) {
  const double s2 = sigma.squaredNorm();
  if (s2 > 1.0) return -sigma / s2;
  return sigma;
}

Dcm mrp_to_dcm(const Mrp& sigma) {
  // C^{B/I} = E + (8 s~^2 - 4 (1 - s^2) s~) / (1 + s^2)^2; return its transpose.
  const double s2 = sigma.squaredNorm();
  const Mat3 st = tilde(sigma);
  const double d = 1.0 + s2;
  return Mat3::Identity() + (8.0 * st * st + 4.0 * (1.0 - s2) * st) / (d * d);
}

Mrp dcm_to_mrp(const Dcm& c) {
  // C^{I/B} is the active rotation of the body attitude quaternion.
  Eigen::Quaterniond q(c);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q.vec() / (1.0 + q.w());
}

Mat3 dcm_derivative(const Dcm& c, const Vec3& omega_body) { return c * tilde(omega_body); }

void require_same_size(const VecX& a, const VecX& b, const char* where) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(where) + ": size " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

void require_shape(const MatX& m, Eigen::Index rows, Eigen::Index cols, const char* where) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(where) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

namespace {

VecX checked(const VecX& k, const VecX& x, const char* stage) {
  if (k.size() != x.size()) {
    throw DimensionError(std::string("rk4_step: derivative size mismatch at ") + stage);
  }
  if (!k.allFinite()) {
    throw IntegrationError(std::string("rk4_step: non-finite derivative at ") + stage);
  }
  return k;
}

}  // namespace

VecX rk4_step(const VecX& x, double t, const Derivative& f, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step: dt must be positive");
  const double h2 = 0.5 * dt;
  const VecX k1 = checked(f(t, x), x, "k1");
  const VecX k2 = checked(f(t + h2, x + h2 * k1), x, "k2");
  const VecX k3 = checked(f(t + h2, x + h2 * k2), x, "k3");
  const VecX k4 = checked(f(t + dt, x + dt * k3), x, "k4");
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VecX rk4_step(const VecX& x, const std::function<VecX(const VecX&)>& f, double dt) {
  return rk4_step(x, 0.0, [&f](double, const VecX& y) { return f(y); }, dt);
}

}  // namespace emff
