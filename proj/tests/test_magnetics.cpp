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

#include "emff/errors.hpp"
#include "emff/magnetics.hpp"
#include "emff/pair_kernel.hpp"
#include "test_support.hpp"

namespace emff {
namespace {

using testing::rel_err;
using testing::Sampler;

TEST(CoilDipole, Examples) {
  const Dipole mu = coil_dipole(290.0, 0.5, kPi * 0.03 * 0.03, Vec3::UnitZ());
  EXPECT_NEAR(mu.z(), 290.0 * 0.5 * kPi * 9e-4, 1e-12);
  EXPECT_NEAR(mu.z(), 0.40997, 1e-5);
  EXPECT_EQ(mu.head<2>(), Eigen::Vector2d::Zero());
  EXPECT_TRUE(coil_dipole(290.0, 0.0, 1.0, Vec3::UnitX()).isZero(0.0));
  const Dipole twice = coil_dipole(290.0, 1.0, kPi * 0.03 * 0.03, Vec3::UnitZ());
  EXPECT_NEAR(twice.norm(), 2.0 * mu.norm(), 1e-14);
}

TEST(CoilDipole, Errors) {
  EXPECT_THROW(coil_dipole(10.0, 1.0, 1.0, Vec3(1.0, 1.0, 0.0)), InvalidArgument);
  EXPECT_THROW(coil_dipole(10.0, 1.0, 0.0, Vec3::UnitX()), InvalidArgument);
}

TEST(DipoleField, Examples) {
  const Dipole mu(0.0, 0.0, 100.0);
  EXPECT_LT((dipole_field(mu, Vec3(0, 0, 2)) - Vec3(0, 0, 2.5e-6)).norm(), 1e-18);
  EXPECT_LT((dipole_field(mu, Vec3(2, 0, 0)) - Vec3(0, 0, -1.25e-6)).norm(), 1e-18);
  EXPECT_TRUE(dipole_field(Vec3::Zero(), Vec3(1, 2, 3)).isZero(0.0));
}

TEST(DipoleField, FarFieldFloor) {
  const Dipole mu(0.0, 0.0, 1.0);
  EXPECT_THROW(dipole_field(mu, Vec3(0.05, 0, 0)), FarFieldViolation);
  EXPECT_NO_THROW(dipole_field(mu, Vec3(0.06, 0, 0)));
  EXPECT_THROW(dipole_force(mu, mu, Vec3(0, 0.01, 0)), FarFieldViolation);
  EXPECT_THROW(dipole_torque(mu, mu, Vec3(0, 0.01, 0)), FarFieldViolation);
  EXPECT_NO_THROW(dipole_field(mu, Vec3(0.02, 0, 0), 0.01));
}

TEST(DipoleForce, Examples) {
  const Dipole mu(0.0, 0.0, 100.0);
  EXPECT_LT((dipole_force(mu, mu, Vec3(0, 0, 2)) - Vec3(0, 0, -3.75e-4)).norm(), 1e-17);
  Sampler s(11);
  EXPECT_TRUE(dipole_force(s.vec(100.0), Vec3::Zero(), Vec3(1, 2, 3)).isZero(0.0));
}

TEST(DipoleForce, SymmetricInTheDipoles) {
  Sampler s(12);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a = s.vec(100.0), b = s.vec(100.0), r = s.unit() * s.uniform(0.1, 20.0);
    EXPECT_LT(rel_err(dipole_force(a, b, r), dipole_force(b, a, r)), 1e-14);
  }
}

TEST(DipoleForce, Antisymmetry) {
  Sampler s(13);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 a = s.vec(1e3), b = s.vec(1e3), r = s.unit() * s.uniform(0.1, 20.0);
    const Vec3 f1 = dipole_force(a, b, r), f2 = dipole_force(b, a, -r);
    EXPECT_LE((f1 + f2).norm(), 1e-13 * std::max(f1.norm(), f2.norm()));
  }
}

TEST(DipoleForce, BilinearAndInverseFourthPower) {
  Sampler s(14);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a = s.vec(10.0), b = s.vec(10.0), r = s.unit() * s.uniform(0.5, 5.0);
    const double al = s.uniform(-3.0, 3.0), be = s.uniform(-3.0, 3.0), k = s.uniform(0.5, 3.0);
    const Vec3 f = dipole_force(a, b, r);
    EXPECT_LT(rel_err(dipole_force(al * a, be * b, r), al * be * f, 1e-300), 1e-13);
    EXPECT_LT(rel_err(dipole_force(a, b, k * r), f / std::pow(k, 4)), 1e-13);
  }
}

TEST(DipoleForce, GradientOfPotential) {
  Sampler s(15);
  for (int i = 0; i < 100; ++i) {
    const Vec3 mk = s.vec(50.0), mj = s.vec(50.0), r = s.unit() * s.uniform(0.5, 5.0);
    const double h = 1e-5 * r.norm();
    Vec3 grad;
    for (int a = 0; a < 3; ++a) {
      const Vec3 e = h * Vec3::Unit(a);
      grad(a) = (mj.dot(dipole_field(mk, r + e)) - mj.dot(dipole_field(mk, r - e))) / (2.0 * h);
    }
    EXPECT_LT(rel_err(dipole_force(mk, mj, r), grad), 1e-6) << "trial " << i;
  }
}

TEST(DipoleTorque, Examples) {
  const Dipole mk(0, 0, 100), mj(100, 0, 0);
  EXPECT_LT((dipole_torque(mk, mj, Vec3(0, 0, 2)) - Vec3(0, -2.5e-4, 0)).norm(), 1e-18);
  Sampler s(16);
  const Vec3 r = s.unit() * 3.0;
  const Vec3 b = dipole_field(mk, r);
  EXPECT_LT(dipole_torque(mk, 7.0 * b / b.norm(), r).norm(), 1e-18);
  EXPECT_TRUE(dipole_torque(mk, mk, Vec3(0, 0, 2)).isZero(0.0));
}

TEST(PairDerivatives, JacobiansMatchFiniteDifferences) {
  Sampler s(17);
  for (int i = 0; i < 50; ++i) {
    const Vec3 mk = s.vec(10.0), mj = s.vec(10.0), r = s.unit() * s.uniform(0.5, 5.0);
    const PairJacobians jac = pair_jacobians(mk, mj, r);
    for (int a = 0; a < 3; ++a) {
      const Vec3 e = Vec3::Unit(a);
      // Bilinear: one-sided differences with unit steps are exact up to rounding.
      const Vec3 dfk = dipole_force(mk + e, mj, r) - dipole_force(mk, mj, r);
      const Vec3 dfj = dipole_force(mk, mj + e, r) - dipole_force(mk, mj, r);
      const Vec3 dtk = dipole_torque(mk + e, mj, r) - dipole_torque(mk, mj, r);
      const Vec3 dtj = dipole_torque(mk, mj + e, r) - dipole_torque(mk, mj, r);
      EXPECT_LT(rel_err(jac.df_dmu_k.col(a), dfk, 1e-20), 1e-8);
      EXPECT_LT(rel_err(jac.df_dmu_j.col(a), dfj, 1e-20), 1e-8);
      EXPECT_LT(rel_err(jac.dtau_dmu_k.col(a), dtk, 1e-20), 1e-8);
      EXPECT_LT(rel_err(jac.dtau_dmu_j.col(a), dtj, 1e-20), 1e-8);
    }
  }
}

TEST(PairDerivatives, TensorsReproduceWrench) {
  Sampler s(18);
  for (int i = 0; i < 50; ++i) {
    const Vec3 mk = s.vec(10.0), mj = s.vec(10.0), r = s.unit() * s.uniform(0.5, 5.0);
    const PairTensors t = pair_tensors(r);
    Vec3 f, tau;
    for (int a = 0; a < 3; ++a) {
      f(a) = mk.dot(t.force[a] * mj);
      tau(a) = mk.dot(t.torque[a] * mj);
    }
    EXPECT_LT(rel_err(f, dipole_force(mk, mj, r)), 1e-13);
    EXPECT_LT(rel_err(tau, dipole_torque(mk, mj, r)), 1e-13);
  }
}

TEST(FieldMatrix, Symmetric) {
  Sampler s(19);
  const Vec3 r = s.unit() * 2.0, mu = s.vec(5.0);
  const Mat3 g = field_matrix(r);
  EXPECT_LT((g - g.transpose()).norm(), 1e-20);
  EXPECT_LT(rel_err(g * mu, dipole_field(mu, r)), 1e-14);
}

TEST(SystemWrench, TwoSatellitesEqualThePair) {
  const std::vector<Dipole> mus = {Vec3(1, 2, 3), Vec3(-2, 0.5, 4)};
  const std::vector<Vec3> pos = {Vec3(0, 0, 0), Vec3(1.5, -0.5, 0.7)};
  const auto w = system_wrench_dc(mus, pos);
  EXPECT_LT(rel_err(w[1].force, dipole_force(mus[0], mus[1], pos[1] - pos[0])), 1e-15);
  EXPECT_LT(rel_err(w[0].force, dipole_force(mus[1], mus[0], pos[0] - pos[1])), 1e-15);
  EXPECT_LT(rel_err(w[1].torque, dipole_torque(mus[0], mus[1], pos[1] - pos[0])), 1e-15);
  EXPECT_LT(rel_err(w[0].torque, dipole_torque(mus[1], mus[0], pos[0] - pos[1])), 1e-15);
}

TEST(SystemWrench, ForceAndMomentClosure) {
  Sampler s(20);
  for (int i = 0; i < 200; ++i) {
    const int n = 4;
    std::vector<Dipole> mus(n);
    for (auto& m : mus) m = s.vec(100.0);
    const std::vector<Vec3> pos = s.positions(n, 10.0, 0.5);
    const auto w = system_wrench_dc(mus, pos);
    Vec3 f = Vec3::Zero(), mo = Vec3::Zero();
    double fmax = 0.0, scale = 0.0;
    for (int j = 0; j < n; ++j) {
      f += w[j].force;
      mo += pos[j].cross(w[j].force) + w[j].torque;
      fmax = std::max(fmax, w[j].force.norm());
      scale = std::max(scale, pos[j].norm() * w[j].force.norm() + w[j].torque.norm());
    }
    EXPECT_LE(f.norm(), 1e-12 * fmax);
    EXPECT_LE(mo.norm(), 1e-12 * scale);
  }
}

TEST(SystemWrench, NamesTheOffendingPair) {
  const std::vector<Dipole> mus(3, Vec3(0, 0, 1));
  const std::vector<Vec3> pos = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1.01, 0, 0)};
  try {
    system_wrench_dc(mus, pos);
    FAIL() << "expected FarFieldViolation";
  } catch (const FarFieldViolation& e) {
    EXPECT_EQ(std::min(e.j(), e.k()), 1);
    EXPECT_EQ(std::max(e.j(), e.k()), 2);
    EXPECT_NEAR(e.distance(), 0.01, 1e-12);
  }
  EXPECT_THROW(system_wrench_dc({Vec3::Zero()}, pos), DimensionError);
}

TEST(WrenchFrames, MixingFramesIsAnError) {
  Wrench a, b;
  b.frame = Frame::kBody;
  EXPECT_THROW(a += b, InvalidArgument);
  Wrench c;
  c.force = Vec3::Ones();
  EXPECT_NO_THROW(a += c);
  EXPECT_EQ(a.force, Vec3::Ones());
}

TEST(AcDipole, Examples) {
  Sampler s(21);
  const AcDipoleSet set = s.ac_set(3, 10.0, 4.0 * kPi);
  for (int j = 0; j < 3; ++j) {
    EXPECT_LT((ac_dipole_at(set, j, 0.0) - set.mu_cos[j]).norm(), 1e-15);
    EXPECT_LT((ac_dipole_at(set, j, kPi / (2.0 * set.omega_f)) - set.mu_sin[j]).norm(), 1e-14);
    EXPECT_LT((ac_dipole_at(set, j, 2.0 * kPi / set.omega_f) - set.mu_cos[j]).norm(), 1e-13);
  }
  EXPECT_THROW(ac_dipole_at(set, 3, 0.0), InvalidArgument);
  EXPECT_THROW(ac_dipole_at(set, -1, 0.0), InvalidArgument);
  EXPECT_EQ(ac_dipoles_at(set, 0.3).size(), 3u);
}

TEST(AcDipole, Validation) {
  AcDipoleSet set(2, 4.0 * kPi);
  EXPECT_NO_THROW(set.validate());
  set.omega_f = 0.0;
  EXPECT_THROW(set.validate(), InvalidArgument);
  set.omega_f = 1.0;
  set.mu_sin[1](0) = std::nan("");
  EXPECT_THROW(set.validate(), InvalidArgument);
  set.mu_sin.pop_back();
  EXPECT_THROW(set.validate(), DimensionError);
}

TEST(AveragedWrench, HalfThePairForSineOnly) {
  AcDipoleSet set(2, 4.0 * kPi);
  set.mu_sin = {Vec3(1, 2, 3), Vec3(0, -1, 2)};
  const std::vector<Vec3> pos = {Vec3::Zero(), Vec3(2, 1, 0)};
  const auto w = averaged_system_wrench(set, pos);
  EXPECT_LT(rel_err(w[1].force, 0.5 * dipole_force(set.mu_sin[0], set.mu_sin[1], pos[1])), 1e-15);
  EXPECT_LT(rel_err(w[1].torque, 0.5 * dipole_torque(set.mu_sin[0], set.mu_sin[1], pos[1])), 1e-15);
  const auto z = averaged_system_wrench(AcDipoleSet(2, 1.0), pos);
  EXPECT_TRUE(z[0].force.isZero(0.0));
  EXPECT_TRUE(z[1].torque.isZero(0.0));
}

TEST(AveragedWrench, MatchesTrapezoidQuadrature) {
  Sampler s(22);
  for (int i = 0; i < 30; ++i) {
    const int n = s.integer(2, 6);
    const AcDipoleSet set = s.ac_set(n, 100.0, s.uniform(1.0, 20.0));
    const std::vector<Vec3> pos = s.positions(n, 5.0, 0.5);
    const auto avg = averaged_system_wrench(set, pos);
    const int pts = 1000;
    const double T = kPi / set.omega_f;
    std::vector<Vec3> f(n, Vec3::Zero()), tau(n, Vec3::Zero());
    for (int k = 0; k < pts; ++k) {
      // Periodic integrand: the trapezoid rule reduces to the plain mean.
      const auto w = system_wrench_dc(ac_dipoles_at(set, T * k / pts), pos);
      for (int j = 0; j < n; ++j) {
        f[j] += w[j].force / pts;
        tau[j] += w[j].torque / pts;
      }
    }
    for (int j = 0; j < n; ++j) {
      EXPECT_LT(rel_err(avg[j].force, f[j]), 1e-9);
      EXPECT_LT(rel_err(avg[j].torque, tau[j]), 1e-9);
    }
  }
}

TEST(TwoTone, Examples) {
  const Dipole a(0, 0, 50), b(10, 0, 40);
  const Vec3 r(0.3, 0.1, 1.5);
  const Vec3 f = dipole_force(a, b, r);
  const ToneAverage same = two_tone_average(a, b, 4.0 * kPi, 4.0 * kPi, 0.0, r);
  EXPECT_LT(rel_err(same.wrench.force, 0.5 * f), 1e-12);
  EXPECT_NEAR(same.factor, 0.5, 1e-12);
  EXPECT_TRUE(same.exact);
  const ToneAverage quad = two_tone_average(a, b, 4.0 * kPi, 4.0 * kPi, kPi / 2.0, r);
  EXPECT_LT(quad.wrench.force.norm(), 1e-12 * f.norm());
  const ToneAverage twice = two_tone_average(a, b, 8.0 * kPi, 4.0 * kPi, 0.0, r);
  EXPECT_LT(twice.wrench.force.norm(), 1e-12 * f.norm());
  EXPECT_TRUE(twice.exact);
  EXPECT_GT(twice.window, 0.0);
  EXPECT_NEAR(std::fmod(twice.window, 2.0 * kPi / (4.0 * kPi)), 0.0, 1e-12);
}

TEST(TwoTone, PhaseGivesCosineFactor) {
  const Dipole a(1, 2, 3), b(-2, 1, 0.5);
  const Vec3 r(1.0, -0.5, 0.2);
  for (double th : {0.1, 0.7, 2.0, 3.0}) {
    const ToneAverage t = two_tone_average(a, b, 3.0, 3.0, th, r);
    EXPECT_NEAR(t.factor, 0.5 * std::cos(th), 1e-12);
    EXPECT_LT(rel_err(t.wrench.force, 0.5 * std::cos(th) * dipole_force(a, b, r)), 1e-10);
  }
}

TEST(TwoTone, IncommensurableReportsTruncation) {
  ToneAverageOptions opt;
  opt.horizon = 500.0;
  const ToneAverage t =
      two_tone_average(Vec3(0, 0, 1), Vec3(0, 0, 1), std::sqrt(2.0) * 5.0, 5.0, 0.0, Vec3(0, 0, 2), opt);
  EXPECT_FALSE(t.exact);
  EXPECT_DOUBLE_EQ(t.window, 500.0);
  EXPECT_LT(std::abs(t.factor), 1e-2);
  EXPECT_THROW(two_tone_average(Vec3::UnitZ(), Vec3::UnitZ(), 0.0, 1.0, 0.0, Vec3(0, 0, 2)),
               InvalidArgument);
}

// Runtime-selected SIMD kernel against the scalar reference.
void fill(PairBatch& b, Sampler& s) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vec3 ma = s.vec(1e3), mb = s.vec(1e3), r = s.unit() * s.uniform(0.1, 20.0);
    for (int a = 0; a < 3; ++a) {
      b.mu_a[a][i] = ma(a);
      b.mu_b[a][i] = mb(a);
      b.r[a][i] = r(a);
    }
  }
}

Vec3 col(const std::vector<double>* v, std::size_t i) { return Vec3(v[0][i], v[1][i], v[2][i]); }

TEST(PairKernel, ScalarMatchesDipoleFunctions) {
  Sampler s(23);
  PairBatch b(37);
  fill(b, s);
  run_pair_kernel(b.view(), PairKernelKind::kScalar);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vec3 ma = col(b.mu_a, i), mb = col(b.mu_b, i), r = col(b.r, i);
    EXPECT_LT(rel_err(col(b.force_a, i), dipole_force(mb, ma, r)), 1e-13);
    EXPECT_LT(rel_err(col(b.torque_a, i), dipole_torque(mb, ma, r)), 1e-13);
    EXPECT_LT(rel_err(col(b.torque_b, i), dipole_torque(ma, mb, -r)), 1e-13);
  }
}

TEST(PairKernel, Avx2MatchesScalar) {
  if (!avx2_available()) GTEST_SKIP() << "no AVX2 on this machine";
  Sampler s(24);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 64u, 1001u}) {
    PairBatch ref(n), simd(n);
    fill(ref, s);
    for (int a = 0; a < 3; ++a) {
      simd.mu_a[a] = ref.mu_a[a];
      simd.mu_b[a] = ref.mu_b[a];
      simd.r[a] = ref.r[a];
    }
    run_pair_kernel(ref.view(), PairKernelKind::kScalar);
    run_pair_kernel(simd.view(), PairKernelKind::kAvx2);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_LT(rel_err(col(simd.force_a, i), col(ref.force_a, i)), 1e-13) << n << ":" << i;
      EXPECT_LT(rel_err(col(simd.torque_a, i), col(ref.torque_a, i)), 1e-13);
      EXPECT_LT(rel_err(col(simd.torque_b, i), col(ref.torque_b, i)), 1e-13);
    }
  }
}

TEST(PairKernel, SelectionRoundTrip) {
  set_pair_kernel(PairKernelKind::kScalar);
  EXPECT_EQ(active_pair_kernel(), PairKernelKind::kScalar);
  set_pair_kernel(PairKernelKind::kAuto);
  EXPECT_EQ(active_pair_kernel(), avx2_available() ? PairKernelKind::kAvx2 : PairKernelKind::kScalar);
  EXPECT_STRNE(pair_kernel_name(PairKernelKind::kScalar), pair_kernel_name(PairKernelKind::kAvx2));
}

TEST(PairKernel, SystemWrenchIndependentOfKernel) {
  Sampler s(25);
  const int n = 6;
  std::vector<Dipole> mus(n);
  for (auto& m : mus) m = s.vec(100.0);
  const auto pos = s.positions(n, 5.0, 0.5);
  set_pair_kernel(PairKernelKind::kScalar);
  const auto a = system_wrench_dc(mus, pos);
  set_pair_kernel(PairKernelKind::kAuto);
  const auto b = system_wrench_dc(mus, pos);
  for (int j = 0; j < n; ++j) {
    EXPECT_LT(rel_err(a[j].force, b[j].force), 1e-13);
    EXPECT_LT(rel_err(a[j].torque, b[j].torque), 1e-13);
  }
}

}  // namespace
}  // namespace emff
