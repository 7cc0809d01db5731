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
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <functional>

namespace emff {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Modified Rodrigues parameters of body B relative to the inertial frame I.
using Mrp = Vec3;

// Direction cosine matrix C^{I/B}: maps body components to inertial components.
using Dcm = Mat3;

constexpr double kPi = 3.14159265358979323846;

Mat3 tilde(const Vec3& a);

// Z(sigma) such that sigma_dot = Z(sigma) * omega_body.
Mat3 mrp_z_matrix(const Mrp& sigma);
Vec3 mrp_kinematics(const Mrp& sigma, const Vec3& omega_body);

// Switches to the shadow set when |sigma| > 1.
Mrp mrp_shadow_switch(const Mrp& sigma);
Mrp mrp_shadow(const Mrp& sigma);

Dcm mrp_to_dcm(const Mrp& sigma);
// Returns the MRP with |sigma| <= 1 for an orthonormal C^{I/B}.
Mrp dcm_to_mrp(const Dcm& c);
// C_dot^{I/B} = C^{I/B} * tilde(omega_body).
Mat3 dcm_derivative(const Dcm& c, const Vec3& omega_body);

// Throws DimensionError when the shapes differ.
void require_same_size(const VecX& a, const VecX& b, const char* where);
void require_shape(const MatX& m, Eigen::Index rows, Eigen::Index cols, const char* where);

using Derivative = std::function<VecX(double t, const VecX& x)>;

// One classical Runge-Kutta step. Throws IntegrationError on non-finite
// derivatives and InvalidArgument when dt <= 0.
VecX rk4_step(const VecX& x, double t, const Derivative& f, double dt);
VecX rk4_step(const VecX& x, const std::function<VecX(const VecX&)>& f, double dt);

}  // namespace emff
