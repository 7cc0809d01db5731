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
#include "emff/controller.hpp"

#include <string>

#include "emff/errors.hpp"

namespace emff {

ControlGains ControlGains::uniform(int n, int m, double k1, double k2_motion, double k2_xi) {
  const KinematicsLayout lay(n, m);
  ControlGains g;
  g.K1 = k1 * MatX::Identity(lay.dim_q(), lay.dim_q());
  g.K2 = MatX::Zero(lay.dim_v(), lay.dim_v());
  g.K2.topLeftCorner(lay.dim_q(), lay.dim_q()).diagonal().setConstant(k2_motion);
  g.K2.bottomRightCorner(3 * m - 3, 3 * m - 3).diagonal().setConstant(k2_xi);
  return g;
}

namespace {

void require_spd(const MatX& k, const char* name) {
  if ((k - k.transpose()).norm() > 1e-12 * (1.0 + k.norm())) {
    throw InvalidArgument(std::string(name) + " is not symmetric");
  }
  if (k.size() == 0) return;
  Eigen::LLT<MatX> llt(k);
  if (llt.info() != Eigen::Success) throw InvalidArgument(std::string(name) + " is not positive definite");
}

}  // namespace

void ControlGains::validate(int n, int m) const {
  const KinematicsLayout lay(n, m);
  require_shape(K1, lay.dim_q(), lay.dim_q(), "ControlGains K1");
  require_shape(K2, lay.dim_v(), lay.dim_v(), "ControlGains K2");
  require_spd(K1, "K1");
  require_spd(K2, "K2");
}

TargetSet TargetSet::from_positions(const std::vector<Vec3>& r_all, const std::vector<Mrp>& sigma) {
  if (r_all.size() < 2 || sigma.size() != r_all.size()) {
    throw DimensionError("TargetSet: need n >= 2 positions and n attitudes");
  }
  TargetSet t;
  t.r_d.assign(r_all.begin() + 1, r_all.end());
  t.sigma_d = sigma;
  return t;
}

std::vector<Vec3> ControlCommand::all_forces() const {
  std::vector<Vec3> f(f_c.size() + 1);
  f[0] = Vec3::Zero();
  for (std::size_t i = 0; i < f_c.size(); ++i) {
    f[i + 1] = f_c[i];
    f[0] -= f_c[i];
  }
  return f;
}

VecX assemble_disturbance(const SystemState& s, const std::vector<SatelliteConfig>& cfgs, int m,
                          const std::vector<Vec3>& external_torques_body,
                          const std::vector<Vec3>& external_forces) {
  const KinematicsLayout lay(s.n(), m);
  if (static_cast<int>(external_torques_body.size()) != lay.n ||
      static_cast<int>(external_forces.size()) != lay.n ||
      static_cast<int>(cfgs.size()) != lay.n) {
    throw DimensionError("assemble_disturbance: per-satellite input counts differ from n");
  }
  VecX u_d = VecX::Zero(lay.dim_zeta());
  for (int i = 1; i < lay.n; ++i) u_d.segment<3>(lay.pos(i)) = external_forces[i];
  for (int i = 0; i < lay.n; ++i) u_d.segment<3>(lay.att(i)) = external_torques_body[i];
  const Vec3 l_dot = momentum_rate_matrix(s, m) * u_d;
  const Vec3 l = angular_momentum(s, cfgs);
  for (int i = 0; i < m; ++i) {
    const Dcm c = mrp_to_dcm(s.sats[i].sigma);
    const Vec3 bl_dot = c.transpose() * (l_dot - (c * s.sats[i].omega).cross(l));
    u_d.segment<3>(lay.xi(i)) = -bl_dot / static_cast<double>(m);
  }
  return u_d;
}

VecX tracking_error(const VecX& q_s, const TargetSet& targets, int n, std::vector<Mrp>* sigma_used) {
  if (q_s.size() != 6 * n - 3 || static_cast<int>(targets.r_d.size()) != n - 1 ||
      static_cast<int>(targets.sigma_d.size()) != n) {
    throw DimensionError("tracking_error: target or state shape mismatch");
  }
  VecX e(q_s.size());
  for (int i = 1; i < n; ++i) e.segment<3>(3 * (i - 1)) = q_s.segment<3>(3 * (i - 1)) - targets.r_d[i - 1];
  if (sigma_used) sigma_used->resize(n);
  for (int i = 0; i < n; ++i) {
    const int o = 3 * n - 3 + 3 * i;
    Mrp s = q_s.segment<3>(o);
    const Mrp& sd = targets.sigma_d[i];
    if (s.squaredNorm() > 0.0) {
      const Mrp alt = mrp_shadow(s);
      if ((alt - sd).squaredNorm() < (s - sd).squaredNorm()) s = alt;
    }
    e.segment<3>(o) = s - sd;
    if (sigma_used) (*sigma_used)[i] = s;
  }
  return e;
}

namespace {

VecX velocity_error(const VecX& v, const TargetSet& targets) {
  if (targets.v_d.size() == 0) return v;
  require_same_size(v, targets.v_d, "velocity error");
  return v - targets.v_d;
}

// T1 with the attitude blocks evaluated at the representation actually differenced.
MatX adjusted_t1(const KinematicsWorkspace& ws, const VecX& q_s, const std::vector<Mrp>& sig) {
  MatX t1 = ws.dyn.T1;
  for (int i = 0; i < ws.layout.n; ++i) {
    const int o = ws.layout.att(i);
    if ((sig[i] - q_s.segment<3>(o)).squaredNorm() > 0.0) {
      t1.block<3, 3>(o, o) = mrp_z_matrix(sig[i]);
    }
  }
  return t1;
}

ControlCommand command_from(const KinematicsWorkspace& ws, const VecX& rhs) {
  const KinematicsLayout& lay = ws.layout;
  ControlCommand cmd;
  cmd.u_c = ws.dyn.B_bar_rinv * rhs;
  cmd.f_c.resize(lay.n - 1);
  cmd.tau_c.resize(lay.n);
  cmd.h_dot.resize(lay.m);
  for (int i = 1; i < lay.n; ++i) cmd.f_c[i - 1] = cmd.u_c.segment<3>(lay.pos(i));
  for (int i = 0; i < lay.n; ++i) cmd.tau_c[i] = cmd.u_c.segment<3>(lay.att(i));
  for (int i = 0; i < lay.m; ++i) cmd.h_dot[i] = cmd.u_c.segment<3>(lay.xi(i));
  return cmd;
}

void check_sizes(const KinematicsWorkspace& ws, const VecX& v, const VecX& u_d) {
  if (v.size() != ws.layout.dim_v() || u_d.size() != ws.layout.dim_zeta()) {
    throw DimensionError("kinematics_control: state or disturbance size mismatch");
  }
}

}  // namespace

ControlCommand kinematics_control(const KinematicsWorkspace& ws, const VecX& q_s, const VecX& v,
                                  const TargetSet& targets, const ControlGains& gains,
                                  const VecX& u_d) {
  check_sizes(ws, v, u_d);
  std::vector<Mrp> sig;
  const VecX e = tracking_error(q_s, targets, ws.layout.n, &sig);
  const MatX t1 = adjusted_t1(ws, q_s, sig);
  const VecX rhs = -t1.transpose() * (gains.K1 * e) - gains.K2 * velocity_error(v, targets) -
                   ws.S.transpose() * u_d;
  return command_from(ws, rhs);
}

ControlCommand kinematics_control_midpoint(const KinematicsWorkspace& ws, const VecX& q_s,
                                           const VecX& v, const TargetSet& targets,
                                           const ControlGains& gains, const VecX& u_d, double dt) {
  check_sizes(ws, v, u_d);
  if (!(dt >= 0.0)) throw InvalidArgument("kinematics_control_midpoint: dt must be >= 0");
  std::vector<Mrp> sig;
  const VecX e = tracking_error(q_s, targets, ws.layout.n, &sig);
  const MatX t1 = adjusted_t1(ws, q_s, sig);
  const VecX dv = velocity_error(v, targets);
  // Nominal closed loop: M_bar v_dot + C_bar v = -T1^T K1 e - K2 (v - v_d).
  const VecX v_dot = ws.dyn.M_bar.llt().solve(-ws.dyn.C_bar * v - t1.transpose() * (gains.K1 * e) -
                                              gains.K2 * dv);
  const VecX e_mid = e + (0.5 * dt) * (t1 * v) + (0.125 * dt * dt) * (t1 * v_dot);
  const VecX dv_mid = dv + (0.5 * dt) * v_dot;
  const VecX rhs = -t1.transpose() * (gains.K1 * e_mid) - gains.K2 * dv_mid - ws.S.transpose() * u_d;
  return command_from(ws, rhs);
}

double lyapunov_value(const KinematicsWorkspace& ws, const VecX& q_s, const VecX& v,
                      const TargetSet& targets, const ControlGains& gains) {
  const VecX e = tracking_error(q_s, targets, ws.layout.n);
  const VecX dv = velocity_error(v, targets);
  return 0.5 * dv.dot(ws.dyn.M_bar * dv) + 0.5 * e.dot(gains.K1 * e);
}

double lyapunov_rate(const VecX& v, const TargetSet& targets, const ControlGains& gains) {
  const VecX dv = velocity_error(v, targets);
  return -dv.dot(gains.K2 * dv);
}

void saturate(ControlCommand* cmd, double force_max, double torque_max) {
  for (auto& f : cmd->f_c) {
    const double nf = f.norm();
    if (nf > force_max) {
      f *= force_max / nf;
      cmd->saturated = true;
    }
  }
  for (auto& t : cmd->tau_c) {
    const double nt = t.norm();
    if (nt > torque_max) {
      t *= torque_max / nt;
      cmd->saturated = true;
    }
  }
}

std::vector<Vec3> conventional_forces(const SystemState& s, const std::vector<SatelliteConfig>& cfgs,
                                      const std::vector<Vec3>& r_targets,
                                      const BaselineGains& g,
                                      const std::vector<Vec3>& gravity_forces) {
  const int n = s.n();
  if (static_cast<int>(r_targets.size()) != n || static_cast<int>(gravity_forces.size()) != n) {
    throw DimensionError("conventional_forces: per-satellite input counts differ from n");
  }
  std::vector<Vec3> f(n);
  for (int j = 0; j < n; ++j) {
    const Vec3 e = r_targets[j] - s.sats[j].r;
    const Vec3 e_dot = -s.sats[j].v;
    const Vec3 surface = e_dot + g.lambda_p1 * e;
    f[j] = -gravity_forces[j] + cfgs[j].mass * (g.lambda_p1 * e_dot + g.lambda_p2 * surface);
  }
  return f;
}

std::vector<Vec3> conventional_rw_torques(const SystemState& s,
                                          const std::vector<SatelliteConfig>& cfgs,
                                          const BaselineGains& g,
                                          const std::vector<Vec3>& tau_em_body) {
  const int n = s.n();
  if (static_cast<int>(tau_em_body.size()) != n) {
    throw DimensionError("conventional_rw_torques: torque count differs from n");
  }
  std::vector<Vec3> out(n, Vec3::Zero());
  for (int j = 0; j < n; ++j) {
    if (!cfgs[j].has_rw) throw InvalidArgument("conventional control needs wheels on every satellite");
    const SatelliteState& sj = s.sats[j];
    out[j] = tau_em_body[j] - sj.omega.cross(cfgs[j].inertia * sj.omega + sj.h) +
             g.lambda_a1 * sj.sigma + g.lambda_a2 * sj.omega;
  }
  return out;
}

ConventionalCommand conventional_control(const SystemState& s,
                                         const std::vector<SatelliteConfig>& cfgs,
                                         const std::vector<Vec3>& r_targets,
                                         const BaselineGains& gains,
                                         const std::vector<Vec3>& gravity_forces,
                                         const std::vector<Vec3>& tau_em_body) {
  ConventionalCommand c;
  c.forces = conventional_forces(s, cfgs, r_targets, gains, gravity_forces);
  c.rw_torques = conventional_rw_torques(s, cfgs, gains, tau_em_body);
  return c;
}

Vec3 mtq_unloading_dipole(const Vec3& h_chief_body, const Vec3& b_body, double k_dc) {
  const double b2 = b_body.squaredNorm();
  if (!(b2 > 0.0)) throw InvalidArgument("mtq_unloading_dipole: zero field");
  return (k_dc / b2) * h_chief_body.cross(b_body);
}

}  // namespace emff
