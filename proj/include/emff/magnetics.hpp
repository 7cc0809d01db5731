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

#include "emff/mathkit.hpp"

namespace emff {

// Vacuum permeability [T m / A].
constexpr double kMu0 = 4.0e-7 * kPi;
constexpr double kDefaultCoilRadius = 0.03;
// Far-field validity floor: two coil radii.
constexpr double kDefaultMinSeparation = 2.0 * kDefaultCoilRadius;

// Dipole moment [A m^2], inertial-frame components.
using Dipole = Vec3;

enum class Frame { kInertial, kBody };

struct Wrench {
  Vec3 force = Vec3::Zero();   // N, inertial frame
  Vec3 torque = Vec3::Zero();  // N m, frame given by `frame`
  Frame frame = Frame::kInertial;

  // Throws InvalidArgument when the torque frames differ.
  Wrench& operator+=(const Wrench& other);
};

Dipole coil_dipole(double turns, double current, double area, const Vec3& normal);

// Field of mu_k at r_jk = r_j - r_k.
Vec3 dipole_field(const Dipole& mu_k, const Vec3& r_jk,
                  double d_min = kDefaultMinSeparation);
// Force on mu_j due to mu_k.
Vec3 dipole_force(const Dipole& mu_k, const Dipole& mu_j, const Vec3& r_jk,
                  double d_min = kDefaultMinSeparation);
// Torque on mu_j due to mu_k.
Vec3 dipole_torque(const Dipole& mu_k, const Dipole& mu_j, const Vec3& r_jk,
                   double d_min = kDefaultMinSeparation);

// G(r) with B = G mu. Symmetric.
Mat3 field_matrix(const Vec3& r);

// Partial derivatives of the pair force / torque on j (both linear in each dipole).
struct PairJacobians {
  Mat3 df_dmu_k;
  Mat3 df_dmu_j;
  Mat3 dtau_dmu_k;
  Mat3 dtau_dmu_j;
};
PairJacobians pair_jacobians(const Dipole& mu_k, const Dipole& mu_j, const Vec3& r_jk);

// f^a(mu_k, mu_j) = mu_k^T F[a] mu_j and tau^a = mu_k^T T[a] mu_j.
struct PairTensors {
  Mat3 force[3];
  Mat3 torque[3];
};
PairTensors pair_tensors(const Vec3& r_jk);

// Throws FarFieldViolation on the first pair closer than d_min.
void check_far_field(const std::vector<Vec3>& positions, double d_min);

// Per-satellite sums of pair force and torque, all inertial frame.
std::vector<Wrench> system_wrench_dc(const std::vector<Dipole>& mus,
                                     const std::vector<Vec3>& positions,
                                     double d_min = kDefaultMinSeparation);

struct AcDipoleSet {
  std::vector<Dipole> mu_sin;
  std::vector<Dipole> mu_cos;
  double omega_f = 4.0 * kPi;

  AcDipoleSet() = default;
  AcDipoleSet(int n, double omega);
  int n() const { return static_cast<int>(mu_sin.size()); }
  // Throws on size mismatch, non-finite amplitudes or omega_f <= 0.
  void validate() const;
};

Dipole ac_dipole_at(const AcDipoleSet& set, int j, double t);
std::vector<Dipole> ac_dipoles_at(const AcDipoleSet& set, double t);

// Time average over T = pi / omega_f of the wrench from ac_dipoles_at.
std::vector<Wrench> averaged_system_wrench(const AcDipoleSet& set,
                                           const std::vector<Vec3>& positions,
                                           double d_min = kDefaultMinSeparation);

struct ToneAverageOptions {
  int max_denominator = 4096;
  double ratio_tolerance = 1e-12;
  // Window used when no common period is found. <= 0 means 1000 periods of
  // the slower tone.
  double horizon = 0.0;
};

struct ToneAverage {
  Wrench wrench;       // on dipole b, inertial frame
  double factor = 0;   // wrench = factor * pair wrench at the amplitudes
  double window = 0;   // averaging window [s]
  bool exact = true;   // false when the window is a truncation horizon
};

// Dipole a driven as mu_a sin(omega_a t + theta), dipole b as mu_b sin(omega_b t).
// r_ba = r_b - r_a.
ToneAverage two_tone_average(const Dipole& mu_a_amp, const Dipole& mu_b_amp, double omega_a,
                             double omega_b, double theta, const Vec3& r_ba,
                             const ToneAverageOptions& options = {},
                             double d_min = kDefaultMinSeparation);

}  // namespace emff
