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
#include <utility>
#include <vector>

#include "emff/magnetics.hpp"
#include "emff/mathkit.hpp"

namespace emff {

constexpr double kMuEarth = 3.986e14;          // m^3 / s^2
constexpr double kEarthRadius = 6378.137e3;    // m, equatorial
constexpr double kEarthDipoleMoment = 8.1e22;  // A m^2
constexpr double kEarthDipoleTiltDeg = 11.0;

// Circular reference orbit in the equatorial plane. The inertial frame I has
// its x axis along the initial radial direction and z along the orbit normal.
struct OrbitReference {
  double mu_g = kMuEarth;
  double R_mag = kEarthRadius + 700e3;
  double mean_motion = 0.0;
  double true_anomaly_phase = 0.0;

  static OrbitReference at_altitude(double altitude_m, double mu_g = kMuEarth);
  double period() const;
  Vec3 o_x(double t) const;            // radial unit vector, I frame
  Vec3 position(double t) const;       // Earth centre to reference point, I frame
};

struct SatelliteConfig {
  double mass = 200.0;
  Mat3 inertia = Eigen::Vector3d(107.0, 107.0, 134.0).asDiagonal();
  bool has_rw = true;
  bool has_mtq = false;
  double coil_radius = kDefaultCoilRadius;
  double mu_max = std::numeric_limits<double>::infinity();
  double rw_h_max = std::numeric_limits<double>::infinity();

  // Throws InvalidArgument when mass <= 0 or inertia is not SPD.
  void validate() const;
};

struct SatelliteState {
  Vec3 r = Vec3::Zero();      // m, I frame, about the formation centre
  Vec3 v = Vec3::Zero();      // m/s, I frame
  Mrp sigma = Vec3::Zero();   // attitude of B_j relative to I
  Vec3 omega = Vec3::Zero();  // rad/s, body frame
  Vec3 h = Vec3::Zero();      // N m s, body frame (zero without wheels)
};

struct SystemState {
  double t = 0.0;
  std::vector<SatelliteState> sats;
  OrbitReference orbit;

  int n() const { return static_cast<int>(sats.size()); }
  std::vector<Vec3> positions() const;
};

// Smallest separation allowed by the coil sizes: two of the largest coil radii.
double min_separation(const std::vector<SatelliteConfig>& cfgs);

// Tidal term of the relative dynamics [m/s^2].
Vec3 tidal_accel(const OrbitReference& orbit, double t, const Vec3& r);
Vec3 relative_accel(const SystemState& state, int j, double mass, const Vec3& applied_force);

struct AttitudeRates {
  Vec3 omega_dot;
  Vec3 h_dot;
};
AttitudeRates attitude_derivative(const SatelliteConfig& cfg, const Vec3& omega, const Vec3& h,
                                  const Vec3& tau_external_body, const Vec3& rw_torque);

Vec3 gravity_gradient_torque(const SatelliteConfig& cfg, const Vec3& R_body,
                             double mu_g = kMuEarth);

// Unit Earth dipole axis in I (points geographically south, tilted toward +x).
Vec3 earth_dipole_axis();
Vec3 geomagnetic_field(const Vec3& R_eci);

// Total linear momentum and angular momentum
// L = sum m_j (r_j - r_1) x v_j + sum C_j J_j omega_j + sum C_j h_j, I frame.
Vec3 linear_momentum(const SystemState& s, const std::vector<SatelliteConfig>& cfgs);
Vec3 angular_momentum(const SystemState& s, const std::vector<SatelliteConfig>& cfgs);

enum class DriveMode { kAveraged, kInstantaneous };

struct DisturbanceModel {
  bool orbital_gravity = true;   // tidal term of the relative dynamics
  bool gravity_gradient = true;  // attitude torque
  bool geomagnetic = false;      // mu x B_e on every coil
};

struct DipoleDrive {
  AcDipoleSet ac;
  std::vector<Dipole> dc;  // empty or one per satellite, I frame
};

// Body-frame disturbance torques seen by the averaged model: gravity gradient
// and (when enabled) dc_j x B_e. AC dipoles average out against the Earth field.
std::vector<Vec3> averaged_disturbance_torques(const SystemState& s,
                                               const std::vector<SatelliteConfig>& cfgs,
                                               const std::vector<Dipole>& dc,
                                               const DisturbanceModel& dist);
// Tidal forces m_j * tidal_accel, I frame (zero when disabled).
std::vector<Vec3> tidal_forces(const SystemState& s, const std::vector<SatelliteConfig>& cfgs,
                               const DisturbanceModel& dist);

// One RK4 step of the coupled translational and attitude dynamics.
// rw_torques holds one body-frame wheel torque per satellite.
SystemState propagate(const SystemState& state, const std::vector<SatelliteConfig>& cfgs,
                      const DipoleDrive& drive, const std::vector<Vec3>& rw_torques, double dt,
                      DriveMode mode, const DisturbanceModel& dist);

}  // namespace emff
