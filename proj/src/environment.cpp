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
#include "emff/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emff/errors.hpp"

namespace emff {

OrbitReference OrbitReference::at_altitude(double altitude_m, double mu_g) {
  OrbitReference o;
  o.mu_g = mu_g;
  o.R_mag = kEarthRadius + altitude_m;
  o.mean_motion = std::sqrt(mu_g / (o.R_mag * o.R_mag * o.R_mag));
  return o;
}

double OrbitReference::period() const { return 2.0 * kPi / mean_motion; }

Vec3 OrbitReference::o_x(double t) const {
  const double th = mean_motion * t + true_anomaly_phase;
  return Vec3(std::cos(th), std::sin(th), 0.0);
}

Vec3 OrbitReference::position(double t) const { return R_mag * o_x(t); }

void SatelliteConfig::validate() const {
  if (!(mass > 0.0)) throw InvalidArgument("satellite mass must be positive");
  if (!inertia.allFinite() || (inertia - inertia.transpose()).norm() > 1e-9 * inertia.norm()) {
    throw InvalidArgument("satellite inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument("satellite inertia must be positive definite");
  }
  if (!(coil_radius > 0.0)) throw InvalidArgument("coil radius must be positive");
  if (!(mu_max > 0.0)) throw InvalidArgument("mu_max must be positive");
}

std::vector<Vec3> SystemState::positions() const {
  std::vector<Vec3> p(sats.size());
  for (std::size_t j = 0; j < sats.size(); ++j) p[j] = sats[j].r;
  return p;
}

double min_separation(const std::vector<SatelliteConfig>& cfgs) {
  double rc = 0.0;
  for (const auto& c : cfgs) rc = std::max(rc, c.coil_radius);
  return 2.0 * rc;
}

Vec3 tidal_accel(const OrbitReference& orbit, double t, const Vec3& r) {
  const Vec3 o = orbit.o_x(t);
  const double n2 = orbit.mu_g / (orbit.R_mag * orbit.R_mag * orbit.R_mag);
  return n2 * (3.0 * o * o.dot(r) - r);
}

namespace {

void check_relative_scale(const OrbitReference& orbit, const Vec3& r, int j) {
  if (!(r.norm() < 1e-2 * orbit.R_mag)) {
    throw ModelValidity("relative position of satellite " + std::to_string(j) +
                        " is not small against the orbit radius");
  }
}

}  // namespace

Vec3 relative_accel(const SystemState& state, int j, double mass, const Vec3& applied_force) {
  if (j < 0 || j >= state.n()) throw InvalidArgument("relative_accel: index out of range");
  const Vec3& r = state.sats[j].r;
  check_relative_scale(state.orbit, r, j);
  return applied_force / mass + tidal_accel(state.orbit, state.t, r);
}

AttitudeRates attitude_derivative(const SatelliteConfig& cfg, const Vec3& omega, const Vec3& h,
                                  const Vec3& tau_external_body, const Vec3& rw_torque) {
  if (!cfg.has_rw && rw_torque.squaredNorm() > 0.0) {
    throw InvalidArgument("wheel torque commanded on a satellite without wheels");
  }
  AttitudeRates out;
  const Vec3 rhs = tau_external_body - rw_torque - omega.cross(cfg.inertia * omega + h);
  out.omega_dot = cfg.inertia.ldlt().solve(rhs);
  out.h_dot = rw_torque;
  return out;
}

Vec3 gravity_gradient_torque(const SatelliteConfig& cfg, const Vec3& R_body, double mu_g) {
  const double r = R_body.norm();
  if (!(r > 0.0)) throw InvalidArgument("gravity_gradient_torque: zero radius");
  const double r2 = r * r;
  return 3.0 * mu_g / (r2 * r2 * r) * R_body.cross(cfg.inertia * R_body);
}

Vec3 earth_dipole_axis() {
  const double tilt = kEarthDipoleTiltDeg * kPi / 180.0;
  return -Vec3(std::sin(tilt), 0.0, std::cos(tilt));
}

Vec3 geomagnetic_field(const Vec3& R_eci) {
  const double r = R_eci.norm();
  if (!(r >= kEarthRadius)) throw ModelValidity("geomagnetic_field: point below the surface");
  const Vec3 mu = kEarthDipoleMoment * earth_dipole_axis();
  const double r2 = r * r;
  const double r3 = r2 * r;
  return 1e-7 * (3.0 * R_eci * mu.dot(R_eci) / (r3 * r2) - mu / r3);
}

Vec3 linear_momentum(const SystemState& s, const std::vector<SatelliteConfig>& cfgs) {
  Vec3 p = Vec3::Zero();
  for (int j = 0; j < s.n(); ++j) p += cfgs[j].mass * s.sats[j].v;
  return p;
}

Vec3 angular_momentum(const SystemState& s, const std::vector<SatelliteConfig>& cfgs) {
  Vec3 l = Vec3::Zero();
  const Vec3& r1 = s.sats[0].r;
  for (int j = 0; j < s.n(); ++j) {
    const SatelliteState& sj = s.sats[j];
    const Dcm c = mrp_to_dcm(sj.sigma);
    l += cfgs[j].mass * (sj.r - r1).cross(sj.v);
    l += c * (cfgs[j].inertia * sj.omega + sj.h);
  }
  return l;
}

std::vector<Vec3> averaged_disturbance_torques(const SystemState& s,
                                               const std::vector<SatelliteConfig>& cfgs,
                                               const std::vector<Dipole>& dc,
                                               const DisturbanceModel& dist) {
  std::vector<Vec3> out(s.n(), Vec3::Zero());
  const Vec3 R = s.orbit.position(s.t);
  const Vec3 be = dist.geomagnetic ? geomagnetic_field(R) : Vec3::Zero();
  for (int j = 0; j < s.n(); ++j) {
    const Dcm c = mrp_to_dcm(s.sats[j].sigma);
    if (dist.gravity_gradient) out[j] += gravity_gradient_torque(cfgs[j], c.transpose() * R, s.orbit.mu_g);
    if (dist.geomagnetic && !dc.empty()) out[j] += c.transpose() * dc[j].cross(be);
  }
  return out;
}

std::vector<Vec3> tidal_forces(const SystemState& s, const std::vector<SatelliteConfig>& cfgs,
                               const DisturbanceModel& dist) {
  std::vector<Vec3> out(s.n(), Vec3::Zero());
  if (!dist.orbital_gravity) return out;
  for (int j = 0; j < s.n(); ++j) out[j] = cfgs[j].mass * tidal_accel(s.orbit, s.t, s.sats[j].r);
  return out;
}

namespace {

constexpr int kStride = 15;

VecX pack(const SystemState& s) {
  VecX x(kStride * s.n());
  for (int j = 0; j < s.n(); ++j) {
    const SatelliteState& sj = s.sats[j];
    x.segment<3>(kStride * j) = sj.r;
    x.segment<3>(kStride * j + 3) = sj.v;
    x.segment<3>(kStride * j + 6) = sj.sigma;
    x.segment<3>(kStride * j + 9) = sj.omega;
    x.segment<3>(kStride * j + 12) = sj.h;
  }
  return x;
}

void unpack(const VecX& x, SystemState* s) {
  for (int j = 0; j < s->n(); ++j) {
    SatelliteState& sj = s->sats[j];
    sj.r = x.segment<3>(kStride * j);
    sj.v = x.segment<3>(kStride * j + 3);
    sj.sigma = x.segment<3>(kStride * j + 6);
    sj.omega = x.segment<3>(kStride * j + 9);
    sj.h = x.segment<3>(kStride * j + 12);
  }
}

}  // namespace

SystemState propagate(const SystemState& state, const std::vector<SatelliteConfig>& cfgs,
                      const DipoleDrive& drive, const std::vector<Vec3>& rw_torques, double dt,
                      DriveMode mode, const DisturbanceModel& dist) {
  const int n = state.n();
  if (!(dt > 0.0)) throw InvalidArgument("propagate: dt must be positive");
  if (static_cast<int>(cfgs.size()) != n || static_cast<int>(rw_torques.size()) != n) {
    throw DimensionError("propagate: per-satellite input counts differ from n");
  }
  if (drive.ac.n() != n) throw DimensionError("propagate: AC dipole count differs from n");
  if (!drive.dc.empty() && static_cast<int>(drive.dc.size()) != n) {
    throw DimensionError("propagate: DC dipole count differs from n");
  }
  drive.ac.validate();
  if (mode == DriveMode::kInstantaneous) {
    const double limit = (2.0 * kPi / drive.ac.omega_f) / 20.0;
    if (dt > limit * (1.0 + 1e-12)) {
      throw InvalidArgument("propagate: instantaneous mode needs dt <= AC period / 20");
    }
  }
  for (int j = 0; j < n; ++j) {
    if (!cfgs[j].has_rw && rw_torques[j].squaredNorm() > 0.0) {
      throw InvalidArgument("propagate: wheel torque on satellite " + std::to_string(j) +
                            " without wheels");
    }
  }
  const double d_min = min_separation(cfgs);
  const bool has_dc = !drive.dc.empty();

  auto deriv = [&](double t, const VecX& x) {
    SystemState s = state;
    s.t = t;
    unpack(x, &s);
    const std::vector<Vec3> pos = s.positions();
    std::vector<Wrench> em;
    std::vector<Dipole> mu_now;
    if (mode == DriveMode::kAveraged) {
      em = averaged_system_wrench(drive.ac, pos, d_min);
      if (has_dc) {
        const std::vector<Wrench> wdc = system_wrench_dc(drive.dc, pos, d_min);
        for (int j = 0; j < n; ++j) em[j] += wdc[j];
      }
    } else {
      mu_now = ac_dipoles_at(drive.ac, t);
      if (has_dc) {
        for (int j = 0; j < n; ++j) mu_now[j] += drive.dc[j];
      }
      em = system_wrench_dc(mu_now, pos, d_min);
    }
    const Vec3 R = s.orbit.position(t);
    const Vec3 be = dist.geomagnetic ? geomagnetic_field(R) : Vec3::Zero();
    VecX dx(x.size());
    for (int j = 0; j < n; ++j) {
      const SatelliteState& sj = s.sats[j];
      check_relative_scale(s.orbit, sj.r, j);
      Vec3 acc = em[j].force / cfgs[j].mass;
      if (dist.orbital_gravity) acc += tidal_accel(s.orbit, t, sj.r);
      const Dcm c = mrp_to_dcm(sj.sigma);
      Vec3 tau_i = em[j].torque;
      if (dist.geomagnetic) {
        if (mode == DriveMode::kAveraged) {
          if (has_dc) tau_i += drive.dc[j].cross(be);
        } else {
          tau_i += mu_now[j].cross(be);
        }
      }
      Vec3 tau_b = c.transpose() * tau_i;
      if (dist.gravity_gradient) tau_b += gravity_gradient_torque(cfgs[j], c.transpose() * R, s.orbit.mu_g);
      const AttitudeRates ar = attitude_derivative(cfgs[j], sj.omega, sj.h, tau_b, rw_torques[j]);
      dx.segment<3>(kStride * j) = sj.v;
      dx.segment<3>(kStride * j + 3) = acc;
      dx.segment<3>(kStride * j + 6) = mrp_kinematics(sj.sigma, sj.omega);
      dx.segment<3>(kStride * j + 9) = ar.omega_dot;
      dx.segment<3>(kStride * j + 12) = ar.h_dot;
    }
    return dx;
  };

  const VecX x1 = rk4_step(pack(state), state.t, deriv, dt);
  if (!x1.allFinite()) throw IntegrationError("propagate: non-finite state");
  SystemState out = state;
  out.t = state.t + dt;
  unpack(x1, &out);
  for (auto& sj : out.sats) sj.sigma = mrp_shadow_switch(sj.sigma);
  return out;
}

}  // namespace emff
