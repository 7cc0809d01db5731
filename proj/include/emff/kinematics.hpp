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

#include <vector>

#include "emff/environment.hpp"
#include "emff/mathkit.hpp"

namespace emff {

// Index bookkeeping for the stacked vectors. Satellites are 0-based here; the
// first m satellites carry wheels and satellite m-1 holds the uncontrolled xi.
//   zeta = [v_1..v_{n-1}; omega_0..omega_{n-1}; xi_0..xi_{m-1}]
//   v    = zeta without xi_{m-1}
//   q_s  = [r_1..r_{n-1}; sigma_0..sigma_{n-1}]
struct KinematicsLayout {
  int n = 0;
  int m = 0;

  KinematicsLayout(int n_sats, int m_wheels);
  int dim_q() const { return 6 * n - 3; }
  int dim_zeta() const { return 6 * n + 3 * m - 3; }
  int dim_v() const { return 6 * n + 3 * m - 6; }
  int pos(int i) const { return 3 * (i - 1); }           // i >= 1
  int att(int i) const { return 3 * n - 3 + 3 * i; }     // 0 <= i < n
  int xi(int i) const { return 6 * n - 3 + 3 * i; }      // 0 <= i < m
};

// Number of leading wheel-equipped satellites. Throws InvalidArgument when
// the wheels are not exactly the first m satellites or m is outside [1, n].
int wheel_count(const std::vector<SatelliteConfig>& cfgs);

struct Constraint {
  MatX A;    // 3 x (6n+3m-3)
  MatX A_s;  // A without the last three columns
};

struct NullSpace {
  MatX S;      // (6n+3m-3) x (6n+3m-6)
  MatX S_dot;
};

struct ReducedDynamics {
  MatX M;  // [M]
  MatX C;  // [C]
  MatX B;  // [B]
  MatX B_inv;
  MatX M_bar;
  MatX C_bar;
  MatX B_bar;
  MatX B_bar_rinv;
  MatX T1;
  double m_bar_condition = 0.0;  // Cholesky-based estimate
};

struct KinematicsWorkspace {
  KinematicsLayout layout{2, 1};
  MatX A;
  MatX A_s;
  MatX S;
  MatX S_dot;
  MatX R;  // momentum-rate matrix: d/dt L = R u
  ReducedDynamics dyn;
};

Constraint build_constraint(const SystemState& s, const std::vector<SatelliteConfig>& cfgs, int m);
NullSpace build_nullspace(const MatX& A_s, const SystemState& s,
                          const std::vector<SatelliteConfig>& cfgs, int m);
// Throws IllConditioned when the M_bar condition estimate exceeds 1e12.
// S and S_dot as returned by build_nullspace.
ReducedDynamics build_reduced_dynamics(const SystemState& s,
                                       const std::vector<SatelliteConfig>& cfgs, int m,
                                       const MatX& A_s, const MatX& S, const MatX& S_dot);
MatX momentum_rate_matrix(const SystemState& s, int m);

KinematicsWorkspace build_workspace(const SystemState& s, const std::vector<SatelliteConfig>& cfgs,
                                    int m);

struct ReducedStates {
  VecX q_s;
  VecX v;
  VecX zeta;
  std::vector<Vec3> xi;     // body frames, one per wheel satellite
  std::vector<Vec3> xi_d;   // -C_j^T L_d / m
  Vec3 L = Vec3::Zero();    // I frame
};

ReducedStates reduced_states(const SystemState& s, const std::vector<SatelliteConfig>& cfgs, int m,
                             const Vec3& L_d = Vec3::Zero());

// Rebuilds zeta from v with xi_{m-1} = -C_{m-1}^T A_s v.
VecX zeta_from_v(const VecX& v, const MatX& A_s, const Dcm& c_last_wheel);

}  // namespace emff
