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

#include <limits>
#include <vector>

#include "emff/environment.hpp"
#include "emff/kinematics.hpp"

namespace emff {

struct ControlGains {
  MatX K1;  // (6n-3)^2
  MatX K2;  // (6n+3m-6)^2

  // K1 = k1 E, K2 = blockdiag(k2_motion E_{6n-3}, k2_xi E_{3m-3}).
  static ControlGains uniform(int n, int m, double k1 = 250.0, double k2_motion = 1250.0,
                              double k2_xi = 0.005);
  // Throws InvalidArgument unless both are symmetric positive definite with
  // the shapes implied by (n, m).
  void validate(int n, int m) const;
};

struct TargetSet {
  std::vector<Vec3> r_d;      // satellites 1..n-1 (0-based), I frame
  std::vector<Mrp> sigma_d;   // all n
  VecX v_d;                   // empty means zero
  Vec3 L_d = Vec3::Zero();

  // Builds from a full list of n target positions; satellite 0's entry is dropped.
  static TargetSet from_positions(const std::vector<Vec3>& r_all, const std::vector<Mrp>& sigma);
};

struct ControlCommand {
  std::vector<Vec3> f_c;    // satellites 1..n-1, I frame
  std::vector<Vec3> tau_c;  // all n, body frames
  std::vector<Vec3> h_dot;  // wheel satellites, body frames
  VecX u_c;
  bool saturated = false;

  // Satellite 0 carries the reaction -sum f_c.
  std::vector<Vec3> all_forces() const;
};

// u_d = [f_g (satellites 1..n-1); tau_d (body); -(1/m) d/dt(bL)] for the wheel satellites.
VecX assemble_disturbance(const SystemState& s, const std::vector<SatelliteConfig>& cfgs, int m,
                          const std::vector<Vec3>& external_torques_body,
                          const std::vector<Vec3>& external_forces);

// Tracking error q_s - q_sd, switching each sigma to the representation nearest
// its target. `sigma_used` receives the attitude representation differenced.
VecX tracking_error(const VecX& q_s, const TargetSet& targets, int n,
                    std::vector<Mrp>* sigma_used = nullptr);

ControlCommand kinematics_control(const KinematicsWorkspace& ws, const VecX& q_s, const VecX& v,
                                  const TargetSet& targets, const ControlGains& gains,
                                  const VecX& u_d);

// Sample-and-hold form: the law evaluated at the state the nominal closed loop
// reaches half a step ahead, for a command held constant over dt. u_d should
// be evaluated at the same mid-step time.
ControlCommand kinematics_control_midpoint(const KinematicsWorkspace& ws, const VecX& q_s,
                                           const VecX& v, const TargetSet& targets,
                                           const ControlGains& gains, const VecX& u_d, double dt);

double lyapunov_value(const KinematicsWorkspace& ws, const VecX& q_s, const VecX& v,
                      const TargetSet& targets, const ControlGains& gains);
// -(v - v_d)^T K2 (v - v_d)
double lyapunov_rate(const VecX& v, const TargetSet& targets, const ControlGains& gains);

// Clips per-satellite force and torque norms; sets cmd.saturated if any clipped.
void saturate(ControlCommand* cmd, double force_max, double torque_max);

struct BaselineGains {
  double lambda_p1 = 0.0125;
  double lambda_p2 = 0.0125;
  double lambda_a1 = 10.0;
  double lambda_a2 = 15.0;
};

struct ConventionalCommand {
  std::vector<Vec3> forces;      // all n, I frame
  std::vector<Vec3> rw_torques;  // all n, body frames
};

// Sliding-surface position law with gravity feedforward, I frame.
std::vector<Vec3> conventional_forces(const SystemState& s, const std::vector<SatelliteConfig>& cfgs,
                                      const std::vector<Vec3>& r_targets,
                                      const BaselineGains& gains,
                                      const std::vector<Vec3>& gravity_forces);
// Wheel law that absorbs the measured EM torque and regulates attitude to zero.
std::vector<Vec3> conventional_rw_torques(const SystemState& s,
                                          const std::vector<SatelliteConfig>& cfgs,
                                          const BaselineGains& gains,
                                          const std::vector<Vec3>& tau_em_body);
ConventionalCommand conventional_control(const SystemState& s,
                                         const std::vector<SatelliteConfig>& cfgs,
                                         const std::vector<Vec3>& r_targets,
                                         const BaselineGains& gains,
                                         const std::vector<Vec3>& gravity_forces,
                                         const std::vector<Vec3>& tau_em_body);

// mu_DC = k_DC / (B.B) (h x B), body frame in and out.
Vec3 mtq_unloading_dipole(const Vec3& h_chief_body, const Vec3& b_body, double k_dc = 0.02);

}  // namespace emff
