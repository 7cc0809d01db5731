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

#include <cmath>

#include "emff/environment.hpp"
#include "emff/errors.hpp"
#include "test_support.hpp"

namespace emff {
namespace {

using testing::rel_err;
using testing::Sampler;

constexpr double kOracleR = 7.078e6;  // worked examples use this rounded radius

TEST(Orbit, PeriodAt700km) {
  const OrbitReference o = OrbitReference::at_altitude(700e3);
  EXPECT_NEAR(o.period(), 5926.0, 1.0);
  const double n = std::sqrt(o.mu_g / std::pow(o.R_mag, 3));
  EXPECT_LE(std::abs(o.mean_motion - n), 1e-12 * n);
  EXPECT_DOUBLE_EQ(o.R_mag, 6378.137e3 + 700e3);
}

TEST(Orbit, RadialDirectionRotatesInPlane) {
  const OrbitReference o = OrbitReference::at_altitude(700e3);
  EXPECT_LT((o.o_x(0.0) - Vec3::UnitX()).norm(), 1e-15);
  EXPECT_LT((o.o_x(o.period() / 4.0) - Vec3::UnitY()).norm(), 1e-12);
  EXPECT_LT((o.position(o.period()) - o.position(0.0)).norm(), 1e-6);
}

SystemState single(const Vec3& r) {
  SystemState s;
  s.orbit = OrbitReference::at_altitude(700e3);
  s.sats.resize(1);
  s.sats[0].r = r;
  return s;
}

TEST(RelativeAccel, Examples) {
  EXPECT_TRUE(relative_accel(single(Vec3::Zero()), 0, 200.0, Vec3::Zero()).isZero(0.0));
  const Vec3 a = relative_accel(single(Vec3::Zero()), 0, 200.0, Vec3(200.0 * 1e-3, 0, 0));
  EXPECT_LT((a - Vec3(1e-3, 0, 0)).norm(), 1e-18);

  SystemState s = single(Vec3(10.0, 0, 0));
  s.orbit.R_mag = kOracleR;
  s.orbit.mean_motion = std::sqrt(s.orbit.mu_g / std::pow(kOracleR, 3));
  const Vec3 g = relative_accel(s, 0, 200.0, Vec3::Zero());
  EXPECT_NEAR(g.x(), 2.0 * kMuEarth / std::pow(kOracleR, 3) * 10.0, 1e-18);
  EXPECT_NEAR(g.x(), 2.248e-5, 1e-8);
  EXPECT_NEAR(g.y(), 0.0, 1e-20);
  EXPECT_NEAR(g.z(), 0.0, 1e-20);
}

TEST(RelativeAccel, TidalTermMatchesTwoBodyDifference) {
  // Oracle: point-mass gravity at R + r minus gravity at R, to first order.
  const OrbitReference o = OrbitReference::at_altitude(700e3);
  Sampler s(31);
  for (int i = 0; i < 20; ++i) {
    const double t = s.uniform(0.0, 6000.0);
    const Vec3 r = s.vec(20.0);
    const Vec3 R = o.position(t);
    auto grav = [&](const Vec3& p) -> Vec3 { return -o.mu_g * p / std::pow(p.norm(), 3); };
    const Vec3 diff = grav(R + r) - grav(R);
    EXPECT_LT(rel_err(tidal_accel(o, t, r), diff), 1e-4);
  }
}

TEST(RelativeAccel, Errors) {
  EXPECT_THROW(relative_accel(single(Vec3(1e5, 0, 0)), 0, 200.0, Vec3::Zero()), ModelValidity);
  EXPECT_THROW(relative_accel(single(Vec3::Zero()), 1, 200.0, Vec3::Zero()), InvalidArgument);
}

TEST(AttitudeDerivative, Examples) {
  SatelliteConfig cfg;
  const AttitudeRates z = attitude_derivative(cfg, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
  EXPECT_TRUE(z.omega_dot.isZero(0.0));
  EXPECT_TRUE(z.h_dot.isZero(0.0));
  const AttitudeRates spin =
      attitude_derivative(cfg, Vec3(0, 0, 0.1), Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
  EXPECT_LT(spin.omega_dot.norm(), 1e-18);
}

TEST(AttitudeDerivative, EulerEquationOracle) {
  Sampler s(32);
  for (int i = 0; i < 50; ++i) {
    SatelliteConfig cfg = s.configs(1, 1)[0];
    const Vec3 w = s.vec(0.2), h = s.vec(3.0), tau = s.vec(0.01), rw = s.vec(0.01);
    const AttitudeRates r = attitude_derivative(cfg, w, h, tau, rw);
    const Vec3 lhs = cfg.inertia * r.omega_dot + w.cross(cfg.inertia * w + h);
    EXPECT_LT(rel_err(lhs, tau - rw), 1e-12);
    EXPECT_EQ(r.h_dot, rw);
  }
}

TEST(AttitudeDerivative, WheelTorqueWithoutWheelsIsAnError) {
  SatelliteConfig cfg;
  cfg.has_rw = false;
  EXPECT_THROW(attitude_derivative(cfg, Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3(1e-3, 0, 0)),
               InvalidArgument);
}

TEST(AttitudeDerivative, FreeBodyConservesInertialMomentum) {
  SatelliteConfig cfg;
  SystemState s = single(Vec3::Zero());
  s.sats[0].omega = Vec3(0.05, -0.02, 0.03);
  s.sats[0].h = Vec3(1.0, 2.0, -0.5);
  s.sats[0].sigma = Vec3(0.1, 0.2, -0.3);
  DisturbanceModel off{false, false, false};
  const DipoleDrive drive{AcDipoleSet(1, 4.0 * kPi), {}};
  auto momentum = [&](const SystemState& st) -> Vec3 {
    const auto& q = st.sats[0];
    return mrp_to_dcm(q.sigma) * (cfg.inertia * q.omega + q.h);
  };
  const Vec3 l0 = momentum(s);
  // The wheel exchanges momentum internally.
  const std::vector<Vec3> rw = {Vec3(1e-3, -2e-3, 5e-4)};
  for (int k = 0; k < 10000; ++k) s = propagate(s, {cfg}, drive, rw, 0.1, DriveMode::kAveraged, off);
  EXPECT_LT((momentum(s) - l0).norm(), 1e-9 * l0.norm());
  EXPECT_LE(s.sats[0].sigma.norm(), 1.0);
  EXPECT_NEAR(s.t, 1000.0, 1e-9);
}

TEST(GravityGradient, Examples) {
  SatelliteConfig cfg;
  EXPECT_LT(gravity_gradient_torque(cfg, kOracleR * Vec3::UnitX()).norm(), 1e-20);
  EXPECT_LT(gravity_gradient_torque(cfg, kOracleR * Vec3::UnitZ()).norm(), 1e-20);
  const Vec3 R = kOracleR * Vec3(1, 0, 1).normalized();
  const Vec3 tau = gravity_gradient_torque(cfg, R);
  const double expect = -1.5 * kMuEarth / std::pow(kOracleR, 3) * (134.0 - 107.0);
  EXPECT_NEAR(tau.y(), expect, 1e-15);
  EXPECT_NEAR(tau.y(), -4.553e-5, 1e-8);
  EXPECT_NEAR(tau.x(), 0.0, 1e-18);
  EXPECT_NEAR(tau.z(), 0.0, 1e-18);
  SatelliteConfig heavy = cfg;
  heavy.inertia *= 2.0;
  EXPECT_LT(rel_err(gravity_gradient_torque(heavy, R), 2.0 * tau), 1e-14);
  EXPECT_THROW(gravity_gradient_torque(cfg, Vec3::Zero()), InvalidArgument);
}

TEST(Geomagnetic, PolarAndEquatorial) {
  const Vec3 axis = earth_dipole_axis();
  EXPECT_NEAR(axis.norm(), 1.0, 1e-15);
  // Tilted 11 degrees from the geographic z axis, pointing south.
  EXPECT_NEAR(std::acos(-axis.z()) * 180.0 / kPi, 11.0, 1e-12);
  const double polar = 2.0e-7 * kEarthDipoleMoment / std::pow(kOracleR, 3);
  const Vec3 bp = geomagnetic_field(kOracleR * axis);
  EXPECT_NEAR(bp.norm(), polar, 1e-15);
  EXPECT_NEAR(bp.norm(), 4.57e-5, 5e-8);
  EXPECT_GT(bp.dot(axis), 0.0);
  const Vec3 eq_dir = axis.unitOrthogonal();
  const Vec3 be = geomagnetic_field(kOracleR * eq_dir);
  EXPECT_LT((be + 0.5 * polar * axis).norm(), 1e-15);
}

TEST(Geomagnetic, InverseCubeAndSurface) {
  const Vec3 d = Vec3(0.3, -0.4, 0.5).normalized();
  const Vec3 b1 = geomagnetic_field(7e6 * d), b2 = geomagnetic_field(14e6 * d);
  EXPECT_LT(rel_err(b2, b1 / 8.0), 1e-14);
  EXPECT_THROW(geomagnetic_field(6e6 * d), ModelValidity);
}

TEST(Disturbances, TidalForcesAndTorques) {
  Sampler s(33);
  const auto cfgs = s.configs(3, 3);
  SystemState st = s.state(cfgs);
  DisturbanceModel dist;
  const auto f = tidal_forces(st, cfgs, dist);
  for (int j = 0; j < 3; ++j) {
    EXPECT_LT(rel_err(f[j], cfgs[j].mass * tidal_accel(st.orbit, st.t, st.sats[j].r)), 1e-15);
  }
  dist.orbital_gravity = false;
  EXPECT_TRUE(tidal_forces(st, cfgs, dist)[1].isZero(0.0));

  dist.gravity_gradient = false;
  dist.geomagnetic = true;
  const std::vector<Dipole> dc = {Vec3(1, 0, 0), Vec3::Zero(), Vec3(0, 0, 2)};
  const auto tau = averaged_disturbance_torques(st, cfgs, dc, dist);
  const Vec3 be = geomagnetic_field(st.orbit.position(st.t));
  EXPECT_LT(rel_err(tau[0], mrp_to_dcm(st.sats[0].sigma).transpose() * dc[0].cross(be)), 1e-14);
  EXPECT_TRUE(tau[1].isZero(0.0));
}

std::vector<SatelliteConfig> plain(int n) { return std::vector<SatelliteConfig>(n); }

TEST(Propagate, StaticWithoutInputs) {
  const auto cfgs = plain(3);
  SystemState s;
  s.orbit = OrbitReference::at_altitude(700e3);
  s.sats.resize(3);
  s.sats[1].r = Vec3(5, 0, 0);
  s.sats[2].r = Vec3(0, 5, 1);
  s.sats[2].sigma = Vec3(0.1, 0.2, 0.3);
  const DipoleDrive drive{AcDipoleSet(3, 4.0 * kPi), {}};
  const std::vector<Vec3> rw(3, Vec3::Zero());
  const DisturbanceModel off{false, false, false};
  SystemState x = s;
  for (int k = 0; k < 100; ++k) x = propagate(x, cfgs, drive, rw, 1.0, DriveMode::kAveraged, off);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(x.sats[j].r, s.sats[j].r);
    EXPECT_EQ(x.sats[j].sigma, s.sats[j].sigma);
    EXPECT_TRUE(x.sats[j].v.isZero(0.0));
  }
  EXPECT_DOUBLE_EQ(x.t, 100.0);
}

struct EmOnly {
  std::vector<SatelliteConfig> cfgs;
  SystemState s;
  DipoleDrive drive;
};

EmOnly em_only(std::uint64_t seed, double mu_scale) {
  Sampler smp(seed);
  EmOnly e;
  e.cfgs = smp.configs(3, 3);
  e.s.orbit = OrbitReference::at_altitude(700e3);
  e.s.sats.resize(3);
  const Vec3 p[3] = {Vec3(0, 0, 0), Vec3(6, 1, 0), Vec3(-2, 6, 1)};
  for (int j = 0; j < 3; ++j) {
    e.s.sats[j].r = p[j];
    e.s.sats[j].sigma = smp.mrp(0.5);
    e.s.sats[j].omega = smp.vec(1e-3);
    e.s.sats[j].h = smp.vec(1.0);
  }
  e.drive.ac = smp.ac_set(3, mu_scale);
  return e;
}

TEST(Propagate, EmOnlyConservesMomentumOverAnOrbit) {
  EmOnly e = em_only(34, 20.0);
  const DisturbanceModel off{false, false, false};
  const std::vector<Vec3> rw(3, Vec3::Zero());
  const Vec3 p0 = linear_momentum(e.s, e.cfgs);
  const Vec3 l0 = angular_momentum(e.s, e.cfgs);
  double p_scale = 0.0;
  SystemState x = e.s;
  const int steps = static_cast<int>(x.orbit.period());
  for (int k = 0; k < steps; ++k) {
    x = propagate(x, e.cfgs, e.drive, rw, 1.0, DriveMode::kAveraged, off);
    for (int j = 0; j < 3; ++j) p_scale = std::max(p_scale, e.cfgs[j].mass * x.sats[j].v.norm());
  }
  EXPECT_GT(p_scale, 1e-4);  // the formation actually moved
  EXPECT_LT((linear_momentum(x, e.cfgs) - p0).norm(), 1e-10 * p_scale);
  EXPECT_LT((angular_momentum(x, e.cfgs) - l0).norm(), 1e-8 * l0.norm());
}

TEST(Propagate, AveragedAndInstantaneousAgreeOverOnePeriod) {
  EmOnly e = em_only(35, 200.0);
  const DisturbanceModel off{false, false, false};
  const std::vector<Vec3> rw(3, Vec3::Zero());
  const double T = 2.0 * kPi / e.drive.ac.omega_f;
  const SystemState avg = propagate(e.s, e.cfgs, e.drive, rw, T, DriveMode::kAveraged, off);
  SystemState inst = e.s;
  for (int k = 0; k < 20; ++k) {
    inst = propagate(inst, e.cfgs, e.drive, rw, T / 20.0, DriveMode::kInstantaneous, off);
  }
  double fmax = 0.0;
  for (const auto& w : averaged_system_wrench(e.drive.ac, e.s.positions())) {
    fmax = std::max(fmax, w.force.norm());
  }
  for (int j = 0; j < 3; ++j) {
    const double a = fmax / e.cfgs[j].mass;
    EXPECT_LT((avg.sats[j].r - inst.sats[j].r).norm(), T * T * a);
    EXPECT_LT((avg.sats[j].v - inst.sats[j].v).norm(), T * a);
  }
  EXPECT_LT((angular_momentum(inst, e.cfgs) - angular_momentum(e.s, e.cfgs)).norm(),
            1e-10 * angular_momentum(e.s, e.cfgs).norm());
}

TEST(Propagate, Errors) {
  EmOnly e = em_only(36, 1.0);
  const DisturbanceModel off{false, false, false};
  const std::vector<Vec3> rw(3, Vec3::Zero());
  EXPECT_THROW(propagate(e.s, e.cfgs, e.drive, rw, 0.0, DriveMode::kAveraged, off), InvalidArgument);
  EXPECT_THROW(propagate(e.s, e.cfgs, e.drive, rw, 0.1, DriveMode::kInstantaneous, off),
               InvalidArgument);
  EXPECT_THROW(propagate(e.s, e.cfgs, e.drive, {Vec3::Zero()}, 0.1, DriveMode::kAveraged, off),
               DimensionError);
  SystemState close = e.s;
  close.sats[1].r = close.sats[0].r + Vec3(0.01, 0, 0);
  EXPECT_THROW(propagate(close, e.cfgs, e.drive, rw, 0.1, DriveMode::kAveraged, off),
               FarFieldViolation);
  auto no_wheel = e.cfgs;
  no_wheel[2].has_rw = false;
  std::vector<Vec3> bad = rw;
  bad[2] = Vec3(1e-3, 0, 0);
  EXPECT_THROW(propagate(e.s, no_wheel, e.drive, bad, 0.1, DriveMode::kAveraged, off), InvalidArgument);
}

TEST(Momentum, DirectSums) {
  Sampler s(37);
  const auto cfgs = s.configs(4, 2);
  const SystemState st = s.state(cfgs);
  Vec3 p = Vec3::Zero(), l = Vec3::Zero();
  for (int j = 0; j < 4; ++j) {
    const auto& q = st.sats[j];
    p += cfgs[j].mass * q.v;
    l += cfgs[j].mass * (q.r - st.sats[0].r).cross(q.v) +
         mrp_to_dcm(q.sigma) * (cfgs[j].inertia * q.omega + q.h);
  }
  EXPECT_LT(rel_err(linear_momentum(st, cfgs), p), 1e-14);
  EXPECT_LT(rel_err(angular_momentum(st, cfgs), l), 1e-14);
}

TEST(SatelliteConfig, Validation) {
  SatelliteConfig c;
  EXPECT_NO_THROW(c.validate());
  c.mass = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SatelliteConfig{};
  c.inertia(0, 1) = 5.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SatelliteConfig{};
  c.inertia(2, 2) = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_DOUBLE_EQ(min_separation(std::vector<SatelliteConfig>(2)), 0.06);
}

}  // namespace
}  // namespace emff
