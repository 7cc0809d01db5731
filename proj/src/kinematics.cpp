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
#include "emff/kinematics.hpp"

#include <string>

#include "emff/errors.hpp"

namespace emff {

KinematicsLayout::KinematicsLayout(int n_sats, int m_wheels) : n(n_sats), m(m_wheels) {
  if (n < 2) throw InvalidArgument("kinematics: need at least two satellites");
  if (m < 1 || m > n) throw InvalidArgument("kinematics: wheel count outside [1, n]");
}

int wheel_count(const std::vector<SatelliteConfig>& cfgs) {
  int m = 0;
  while (m < static_cast<int>(cfgs.size()) && cfgs[m].has_rw) ++m;
  for (std::size_t j = m; j < cfgs.size(); ++j) {
    if (cfgs[j].has_rw) {
      throw InvalidArgument("wheel-equipped satellites must come first in the satellite list");
    }
  }
  if (m < 1) throw InvalidArgument("at least one satellite must carry wheels");
  return m;
}

namespace {

void check_sizes(const SystemState& s, const std::vector<SatelliteConfig>& cfgs) {
  if (static_cast<int>(cfgs.size()) != s.n()) {
    throw DimensionError("kinematics: config count differs from state size");
  }
}

std::vector<Dcm> dcms(const SystemState& s) {
  std::vector<Dcm> c(s.n());
  for (int j = 0; j < s.n(); ++j) c[j] = mrp_to_dcm(s.sats[j].sigma);
  return c;
}

}  // namespace

Constraint build_constraint(const SystemState& s, const std::vector<SatelliteConfig>& cfgs, int m) {
  check_sizes(s, cfgs);
  const KinematicsLayout lay(s.n(), m);
  const std::vector<Dcm> c = dcms(s);
  Constraint out;
  out.A = MatX::Zero(3, lay.dim_zeta());
  const Mat3 r1t = tilde(s.sats[0].r);
  for (int i = 1; i < lay.n; ++i) {
    out.A.block<3, 3>(0, lay.pos(i)) = cfgs[i].mass * (tilde(s.sats[i].r) - r1t);
  }
  for (int i = 0; i < lay.n; ++i) out.A.block<3, 3>(0, lay.att(i)) = c[i] * cfgs[i].inertia;
  for (int i = 0; i < lay.m; ++i) out.A.block<3, 3>(0, lay.xi(i)) = c[i];
  out.A_s = out.A.leftCols(lay.dim_v());
  return out;
}

NullSpace build_nullspace(const MatX& A_s, const SystemState& s,
                          const std::vector<SatelliteConfig>& cfgs, int m) {
  check_sizes(s, cfgs);
  const KinematicsLayout lay(s.n(), m);
  require_shape(A_s, 3, lay.dim_v(), "build_nullspace");
  const std::vector<Dcm> c = dcms(s);
  const int nv = lay.dim_v();
  const int last = m - 1;
  const Mat3 cmt = c[last].transpose();

  MatX a_dot = MatX::Zero(3, nv);
  const Mat3 v1t = tilde(s.sats[0].v);
  for (int i = 1; i < lay.n; ++i) {
    a_dot.block<3, 3>(0, lay.pos(i)) = cfgs[i].mass * (tilde(s.sats[i].v) - v1t);
  }
  for (int i = 0; i < lay.n; ++i) {
    a_dot.block<3, 3>(0, lay.att(i)) = c[i] * tilde(s.sats[i].omega) * cfgs[i].inertia;
  }
  for (int i = 0; i < last; ++i) {
    a_dot.block<3, 3>(0, lay.xi(i)) = c[i] * tilde(s.sats[i].omega);
  }

  NullSpace out;
  out.S = MatX::Zero(lay.dim_zeta(), nv);
  out.S.topRows(nv).setIdentity();
  out.S.bottomRows<3>() = -cmt * A_s;
  out.S_dot = MatX::Zero(lay.dim_zeta(), nv);
  // d/dt C^T = -omega~ C^T
  out.S_dot.bottomRows<3>() = tilde(s.sats[last].omega) * cmt * A_s - cmt * a_dot;
  return out;
}

ReducedDynamics build_reduced_dynamics(const SystemState& s,
                                       const std::vector<SatelliteConfig>& cfgs, int m,
                                       const MatX& A_s, const MatX& S, const MatX& S_dot) {
  check_sizes(s, cfgs);
  const KinematicsLayout lay(s.n(), m);
  const int nz = lay.dim_zeta();
  const int nv = lay.dim_v();
  require_shape(A_s, 3, nv, "build_reduced_dynamics: A_s");
  require_shape(S, nz, nv, "build_reduced_dynamics: S");
  require_shape(S_dot, nz, nv, "build_reduced_dynamics: S_dot");

  ReducedDynamics d;
  d.M = MatX::Identity(nz, nz);
  d.C = MatX::Zero(nz, nz);
  d.B = MatX::Identity(nz, nz);
  for (int i = 1; i < lay.n; ++i) d.M.block<3, 3>(lay.pos(i), lay.pos(i)) *= cfgs[i].mass;
  for (int i = 0; i < lay.n; ++i) {
    const SatelliteState& si = s.sats[i];
    d.M.block<3, 3>(lay.att(i), lay.att(i)) = cfgs[i].inertia;
    d.C.block<3, 3>(lay.att(i), lay.att(i)) = -tilde(cfgs[i].inertia * si.omega + si.h);
  }
  d.B_inv = d.B;
  for (int i = 0; i < lay.m; ++i) {
    d.B.block<3, 3>(lay.att(i), lay.xi(i)) = -Mat3::Identity();
    d.B_inv.block<3, 3>(lay.att(i), lay.xi(i)) = Mat3::Identity();
  }

  // S = [E; W] as built by build_nullspace, and [M], [C] are block diagonal
  // with nothing coupling into the last wheel block, so the products reduce to
  // rank-3 updates.
  const auto W = S.bottomRows<3>();
  const auto W_dot = S_dot.bottomRows<3>();
  MatX MS(nz, nv);
  MS.topRows(nv) = d.M.topLeftCorner(nv, nv);
  MS.bottomRows<3>() = W;
  d.M_bar = d.M.topLeftCorner(nv, nv);
  d.M_bar.noalias() += W.transpose() * W;
  d.M_bar = 0.5 * (d.M_bar + d.M_bar.transpose());
  d.C_bar = d.C.topLeftCorner(nv, nv);
  d.C_bar.noalias() += W.transpose() * W_dot;
  d.B_bar = d.B.topRows(nv);
  d.B_bar.noalias() += W.transpose() * d.B.bottomRows<3>();
  MatX BiMS = MS;
  for (int i = 0; i < lay.m; ++i) BiMS.middleRows<3>(lay.att(i)) += MS.middleRows<3>(lay.xi(i));

  Eigen::LLT<MatX> llt(d.M_bar);
  if (llt.info() != Eigen::Success) throw IllConditioned("M_bar is not positive definite");
  const VecX diag = MatX(llt.matrixL()).diagonal();
  const double ratio = diag.maxCoeff() / diag.minCoeff();
  d.m_bar_condition = ratio * ratio;
  if (!(d.m_bar_condition <= 1e12)) {
    throw IllConditioned("M_bar condition estimate " + std::to_string(d.m_bar_condition));
  }
  // B_inv M S M_bar^{-1} = (M_bar^{-1} (B_inv M S)^T)^T since M_bar is symmetric.
  d.B_bar_rinv = llt.solve(BiMS.transpose()).transpose();

  d.T1 = MatX::Zero(lay.dim_q(), nv);
  d.T1.topLeftCorner(3 * lay.n - 3, 3 * lay.n - 3).setIdentity();
  for (int i = 0; i < lay.n; ++i) {
    d.T1.block<3, 3>(lay.att(i), lay.att(i)) = mrp_z_matrix(s.sats[i].sigma);
  }
  return d;
}

MatX momentum_rate_matrix(const SystemState& s, int m) {
  const KinematicsLayout lay(s.n(), m);
  MatX r = MatX::Zero(3, lay.dim_zeta());
  for (int i = 1; i < lay.n; ++i) {
    r.block<3, 3>(0, lay.pos(i)) = tilde(s.sats[i].r - s.sats[0].r);
  }
  for (int i = 0; i < lay.n; ++i) r.block<3, 3>(0, lay.att(i)) = mrp_to_dcm(s.sats[i].sigma);
  return r;
}

KinematicsWorkspace build_workspace(const SystemState& s, const std::vector<SatelliteConfig>& cfgs,
                                    int m) {
  KinematicsWorkspace ws;
  ws.layout = KinematicsLayout(s.n(), m);
  Constraint con = build_constraint(s, cfgs, m);
  NullSpace ns = build_nullspace(con.A_s, s, cfgs, m);
  ws.dyn = build_reduced_dynamics(s, cfgs, m, con.A_s, ns.S, ns.S_dot);
  ws.A = std::move(con.A);
  ws.A_s = std::move(con.A_s);
  ws.S = std::move(ns.S);
  ws.S_dot = std::move(ns.S_dot);
  ws.R = momentum_rate_matrix(s, m);
  return ws;
}

ReducedStates reduced_states(const SystemState& s, const std::vector<SatelliteConfig>& cfgs, int m,
                             const Vec3& L_d) {
  check_sizes(s, cfgs);
  const KinematicsLayout lay(s.n(), m);
  ReducedStates out;
  out.L = angular_momentum(s, cfgs);
  out.q_s.resize(lay.dim_q());
  out.zeta.resize(lay.dim_zeta());
  for (int i = 1; i < lay.n; ++i) {
    out.q_s.segment<3>(lay.pos(i)) = s.sats[i].r;
    out.zeta.segment<3>(lay.pos(i)) = s.sats[i].v;
  }
  for (int i = 0; i < lay.n; ++i) {
    out.q_s.segment<3>(lay.att(i)) = s.sats[i].sigma;
    out.zeta.segment<3>(lay.att(i)) = s.sats[i].omega;
  }
  out.xi.resize(m);
  out.xi_d.resize(m);
  for (int i = 0; i < m; ++i) {
    const Mat3 ct = mrp_to_dcm(s.sats[i].sigma).transpose();
    out.xi[i] = s.sats[i].h - ct * out.L / static_cast<double>(m);
    out.xi_d[i] = -ct * L_d / static_cast<double>(m);
    out.zeta.segment<3>(lay.xi(i)) = out.xi[i];
  }
  out.v = out.zeta.head(lay.dim_v());
  return out;
}

VecX zeta_from_v(const VecX& v, const MatX& A_s, const Dcm& c_last_wheel) {
  if (A_s.rows() != 3 || A_s.cols() != v.size()) throw DimensionError("zeta_from_v: shape");
  VecX z(v.size() + 3);
  z.head(v.size()) = v;
  z.tail<3>() = -c_last_wheel.transpose() * (A_s * v);
  return z;
}

}  // namespace emff
