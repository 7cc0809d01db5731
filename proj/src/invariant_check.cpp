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
#include "emff/invariant_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "emff/allocation.hpp"
#include "emff/controller.hpp"
#include "emff/environment.hpp"
#include "emff/errors.hpp"
#include "emff/kinematics.hpp"
#include "emff/pair_kernel.hpp"

namespace emff {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Vec3 vec(double scale) { return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)); }
  Mrp mrp() {
    Vec3 p;
    do {
      p = vec(1.0);
    } while (p.squaredNorm() > 1.0);
    return p;
  }
  // Positions at least `gap` apart inside a cube of half width `span`.
  std::vector<Vec3> positions(int n, double span, double gap) {
    std::vector<Vec3> p;
    while (static_cast<int>(p.size()) < n) {
      const Vec3 c = vec(span);
      bool ok = true;
      for (const auto& q : p) ok = ok && (c - q).norm() >= gap;
      if (ok) p.push_back(c);
    }
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

CheckResult action_reaction(Sampler& s, int trials) {
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Vec3 mk = s.vec(1e4), mj = s.vec(1e4);
    const Vec3 r = s.vec(10.0) + Vec3(0.5, 0.0, 0.0);
    const Vec3 f1 = dipole_force(mk, mj, r), f2 = dipole_force(mj, mk, -r);
    worst = std::max(worst, (f1 + f2).norm() / std::max(f1.norm(), 1e-300));
  }
  return {"pairwise action-reaction", worst <= 1e-13, fmt("max rel %.3g", worst)};
}

CheckResult closure(Sampler& s, int trials) {
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const int n = s.integer(2, 6);
    const std::vector<Vec3> p = s.positions(n, 10.0, 1.0);
    std::vector<Dipole> mu(n);
    for (auto& m : mu) m = s.vec(1e4);
    const std::vector<Wrench> w = system_wrench_dc(mu, p);
    Vec3 f = Vec3::Zero(), t = Vec3::Zero();
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
      f += w[j].force;
      t += w[j].torque + p[j].cross(w[j].force);
      scale += w[j].torque.norm() + p[j].norm() * w[j].force.norm();
    }
    worst = std::max(worst, (f.norm() * 10.0 + t.norm()) / scale);
  }
  return {"system wrench closure", worst <= 1e-12, fmt("max rel %.3g", worst)};
}

CheckResult averaging(Sampler& s, int trials) {
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const int n = s.integer(2, 5);
    AcDipoleSet set(n, s.uniform(1.0, 60.0));
    for (int j = 0; j < n; ++j) {
      set.mu_sin[j] = s.vec(1e4);
      set.mu_cos[j] = s.vec(1e4);
    }
    const std::vector<Vec3> p = s.positions(n, 10.0, 1.0);
    const std::vector<Wrench> avg = averaged_system_wrench(set, p);
    const int q = 200;
    const double period = kPi / set.omega_f;
    std::vector<Wrench> acc(n);
    for (int k = 0; k < q; ++k) {
      const std::vector<Wrench> w = system_wrench_dc(ac_dipoles_at(set, (k + 0.5) * period / q), p);
      for (int j = 0; j < n; ++j) {
        acc[j].force += w[j].force / q;
        acc[j].torque += w[j].torque / q;
      }
    }
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j) {
      num += (acc[j].force - avg[j].force).norm() + (acc[j].torque - avg[j].torque).norm();
      den += avg[j].force.norm() + avg[j].torque.norm();
    }
    worst = std::max(worst, num / den);
  }
  return {"averaged wrench vs quadrature", worst <= 1e-9, fmt("max rel %.3g", worst)};
}

SystemState random_state(Sampler& s, int n) {
  SystemState st;
  st.sats.resize(n);
  const std::vector<Vec3> p = s.positions(n, 10.0, 1.0);
  for (int j = 0; j < n; ++j) {
    st.sats[j].r = p[j];
    st.sats[j].v = s.vec(0.01);
    st.sats[j].sigma = s.mrp();
    st.sats[j].omega = s.vec(0.01);
    st.sats[j].h = s.vec(1.0);
  }
  return st;
}

CheckResult null_space(Sampler& s, int trials) {
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const int n = s.integer(2, 5);
    const int m = s.integer(1, n);
    std::vector<SatelliteConfig> cfgs(n);
    for (int j = 0; j < n; ++j) cfgs[j].has_rw = j < m;
    SystemState st = random_state(s, n);
    for (int j = m; j < n; ++j) st.sats[j].h.setZero();
    const KinematicsWorkspace ws = build_workspace(st, cfgs, m);
    worst = std::max(worst, (ws.A * ws.S).norm() / ws.A.norm());
  }
  return {"null space A S = 0", worst <= 1e-12, fmt("max rel %.3g", worst)};
}

CheckResult mrp_round_trip(Sampler& s, int trials) {
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Mrp p = s.mrp();
    Mrp q = dcm_to_mrp(mrp_to_dcm(p));
    if ((q - p).norm() > (mrp_shadow(q) - p).norm()) q = mrp_shadow(q);
    worst = std::max(worst, (q - p).norm());
  }
  return {"MRP to DCM round trip", worst <= 1e-12, fmt("max abs %.3g", worst)};
}

CheckResult conservation(Sampler& s, int trials) {
  double worst = 0.0;
  const DisturbanceModel none{false, false, false};
  for (int i = 0; i < std::max(1, trials / 10); ++i) {
    const int n = s.integer(2, 4);
    std::vector<SatelliteConfig> cfgs(n);
    SystemState st = random_state(s, n);
    Vec3 p0 = Vec3::Zero();
    for (auto& sj : st.sats) p0 += sj.v;
    for (auto& sj : st.sats) sj.v -= p0 / n;
    DipoleDrive drive;
    drive.ac = AcDipoleSet(n, 4.0 * kPi);
    for (int j = 0; j < n; ++j) drive.ac.mu_sin[j] = s.vec(1e3);
    const std::vector<Vec3> rw(n, Vec3::Zero());
    const Vec3 l0 = angular_momentum(st, cfgs);
    for (int k = 0; k < 50; ++k) st = propagate(st, cfgs, drive, rw, 0.05, DriveMode::kAveraged, none);
    const Vec3 l1 = angular_momentum(st, cfgs);
    worst = std::max(worst, (l1 - l0).norm() / (1.0 + l0.norm()));
  }
  return {"EM-only angular momentum drift", worst <= 1e-10, fmt("max rel %.3g", worst)};
}

CheckResult simd_equivalence(Sampler& s, int trials) {
  if (!avx2_available()) return {"AVX2 kernel equals scalar kernel", true, "skipped: no AVX2"};
  const std::size_t count = static_cast<std::size_t>(trials) + 3;
  PairBatch a(count), b(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 ma = s.vec(1e4), mb = s.vec(1e4), r = s.vec(10.0) + Vec3(0.5, 0.5, 0.5);
    for (int c = 0; c < 3; ++c) {
      a.mu_a[c][i] = b.mu_a[c][i] = ma(c);
      a.mu_b[c][i] = b.mu_b[c][i] = mb(c);
      a.r[c][i] = b.r[c][i] = r(c);
    }
  }
  run_pair_kernel(a.view(), PairKernelKind::kScalar);
  run_pair_kernel(b.view(), PairKernelKind::kAvx2);
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 fa, fb;
    for (int c = 0; c < 3; ++c) {
      fa(c) = a.force_a[c][i];
      fb(c) = b.force_a[c][i];
    }
    worst = std::max(worst, (fa - fb).norm() / std::max(fa.norm(), 1e-300));
  }
  return {"AVX2 kernel equals scalar kernel", worst <= 1e-12, fmt("max rel %.3g", worst)};
}

CheckResult allocation(Sampler& s, int trials) {
  int failures = 0;
  const int count = std::max(1, trials / 20);
  for (int i = 0; i < count; ++i) {
    const int n = s.integer(2, 5);
    AllocationProblem prob;
    prob.positions = s.positions(n, 10.0, 2.0);
    // Targets realized by a random dipole set are consistent by construction.
    AcDipoleSet set(n, 4.0 * kPi);
    for (int j = 0; j < n; ++j) {
      set.mu_sin[j] = s.vec(1e4);
      set.mu_cos[j] = s.vec(1e4);
    }
    const std::vector<Wrench> w = averaged_system_wrench(set, prob.positions);
    for (int j = 1; j < n; ++j) prob.target_force.push_back(w[j].force);
    for (int j = 0; j < n; ++j) prob.target_torque.push_back(w[j].torque);
    AllocationSettings settings;
    settings.seed = static_cast<std::uint64_t>(i);
    try {
      const AllocationSolution sol = solve_ac_allocation(prob, settings, 4.0 * kPi);
      if (!(sol.residual < 1e-6)) ++failures;
    } catch (const NoFeasibleSolution&) {
      ++failures;
    }
  }
  return {"AC allocation feasibility", failures == 0,
          std::to_string(failures) + " of " + std::to_string(count) + " failed"};
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed, int trials) {
  if (trials < 1) throw InvalidArgument("run_invariant_checks: trials must be >= 1");
  Sampler s(seed);
  std::vector<CheckResult> out;
  out.push_back(action_reaction(s, trials));
  out.push_back(closure(s, trials));
  out.push_back(averaging(s, std::max(1, trials / 10)));
  out.push_back(null_space(s, trials));
  out.push_back(mrp_round_trip(s, trials));
  out.push_back(conservation(s, trials));
  out.push_back(simd_equivalence(s, trials));
  out.push_back(allocation(s, trials));
  return out;
}

}  // namespace emff
