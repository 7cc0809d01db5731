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
#include "emff/magnetics.hpp"

#include <cmath>
#include <string>

#include "emff/errors.hpp"
#include "emff/pair_kernel.hpp"
#include "pair_math.hpp"

namespace emff {

Wrench& Wrench::operator+=(const Wrench& other) {
  if (frame != other.frame) throw InvalidArgument("Wrench: torque frames differ");
  force += other.force;
  torque += other.torque;
  return *this;
}

Dipole coil_dipole(double turns, double current, double area, const Vec3& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-9) throw InvalidArgument("coil_dipole: normal is not unit");
  if (!(area > 0.0)) throw InvalidArgument("coil_dipole: area must be positive");
  return turns * current * area * normal;
}

namespace {

void check_pair(const Vec3& r, double d_min, int j, int k) {
  const double d = r.norm();
  if (!(d >= d_min)) {
    throw FarFieldViolation("far-field violation between dipoles " + std::to_string(j) +
                                " and " + std::to_string(k) + ": distance " +
                                std::to_string(d) + " m < " + std::to_string(d_min) + " m",
                            j, k, d);
  }
}

}  // namespace

Mat3 field_matrix(const Vec3& r) {
  const double r2 = r.squaredNorm();
  const double inv_r = 1.0 / std::sqrt(r2);
  const double inv_r3 = inv_r * inv_r * inv_r;
  return detail::kMuOver4Pi * inv_r3 * (3.0 * r * r.transpose() / r2 - Mat3::Identity());
}

Vec3 dipole_field(const Dipole& mu_k, const Vec3& r_jk, double d_min) {
  check_pair(r_jk, d_min, -1, -1);
  const double r2 = r_jk.squaredNorm();
  const double inv_r = 1.0 / std::sqrt(r2);
  const double inv_r3 = inv_r * inv_r * inv_r;
  const double inv_r5 = inv_r3 / r2;
  return detail::kMuOver4Pi * (3.0 * mu_k.dot(r_jk) * inv_r5 * r_jk - inv_r3 * mu_k);
}

Vec3 dipole_force(const Dipole& mu_k, const Dipole& mu_j, const Vec3& r_jk, double d_min) {
  check_pair(r_jk, d_min, -1, -1);
  double f[3], ta[3], tb[3];
  detail::pair_eval(mu_j.data(), mu_k.data(), r_jk.data(), f, ta, tb);
  return Vec3(f[0], f[1], f[2]);
}

Vec3 dipole_torque(const Dipole& mu_k, const Dipole& mu_j, const Vec3& r_jk, double d_min) {
  check_pair(r_jk, d_min, -1, -1);
  double f[3], ta[3], tb[3];
  detail::pair_eval(mu_j.data(), mu_k.data(), r_jk.data(), f, ta, tb);
  return Vec3(ta[0], ta[1], ta[2]);
}

PairTensors pair_tensors(const Vec3& r) {
  const double r2 = r.squaredNorm();
  const double inv_r = 1.0 / std::sqrt(r2);
  const double inv_r5 = inv_r * inv_r * inv_r * inv_r * inv_r;
  const double c = 3.0 * detail::kMuOver4Pi * inv_r5;
  const Mat3 rr = r * r.transpose();
  const Mat3 g = field_matrix(r);
  PairTensors t;
  for (int a = 0; a < 3; ++a) {
    const Vec3 ea = Vec3::Unit(a);
    t.force[a] = c * (r(a) * Mat3::Identity() + r * ea.transpose() + ea * r.transpose() -
                      (5.0 * r(a) / r2) * rr);
    t.torque[a] = g * tilde(ea);
  }
  return t;
}

PairJacobians pair_jacobians(const Dipole& mu_k, const Dipole& mu_j, const Vec3& r_jk) {
  const PairTensors t = pair_tensors(r_jk);
  const Mat3 g = field_matrix(r_jk);
  PairJacobians jac;
  for (int a = 0; a < 3; ++a) {
    jac.df_dmu_j.row(a) = mu_k.transpose() * t.force[a];
    jac.df_dmu_k.row(a) = mu_j.transpose() * t.force[a];
  }
  jac.dtau_dmu_j = -tilde(g * mu_k);
  jac.dtau_dmu_k = tilde(mu_j) * g;
  return jac;
}

void check_far_field(const std::vector<Vec3>& positions, double d_min) {
  const int n = static_cast<int>(positions.size());
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) check_pair(positions[j] - positions[k], d_min, j, k);
  }
}

std::vector<Wrench> system_wrench_dc(const std::vector<Dipole>& mus,
                                     const std::vector<Vec3>& positions, double d_min) {
  if (mus.size() != positions.size()) {
    throw DimensionError("system_wrench_dc: dipole and position counts differ");
  }
  const int n = static_cast<int>(mus.size());
  check_far_field(positions, d_min);
  const std::size_t pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
  thread_local PairBatch batch;
  if (batch.size() != pairs) batch.resize(pairs);
  std::size_t p = 0;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k, ++p) {
      const Vec3 r = positions[j] - positions[k];
      for (int c = 0; c < 3; ++c) {
        batch.mu_a[c][p] = mus[j](c);
        batch.mu_b[c][p] = mus[k](c);
        batch.r[c][p] = r(c);
      }
    }
  }
  run_pair_kernel(batch.view());
  std::vector<Wrench> out(n);
  p = 0;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k, ++p) {
      for (int c = 0; c < 3; ++c) {
        out[j].force(c) += batch.force_a[c][p];
        out[k].force(c) -= batch.force_a[c][p];
        out[j].torque(c) += batch.torque_a[c][p];
        out[k].torque(c) += batch.torque_b[c][p];
      }
    }
  }
  return out;
}

AcDipoleSet::AcDipoleSet(int n, double omega)
    : mu_sin(n, Vec3::Zero()), mu_cos(n, Vec3::Zero()), omega_f(omega) {}

void AcDipoleSet::validate() const {
  if (mu_sin.size() != mu_cos.size()) throw DimensionError("AcDipoleSet: sin/cos counts differ");
  if (!(omega_f > 0.0) || !std::isfinite(omega_f)) {
    throw InvalidArgument("AcDipoleSet: omega_f must be positive and finite");
  }
  for (std::size_t j = 0; j < mu_sin.size(); ++j) {
    if (!mu_sin[j].allFinite() || !mu_cos[j].allFinite()) {
      throw InvalidArgument("AcDipoleSet: non-finite amplitude at " + std::to_string(j));
    }
  }
}

Dipole ac_dipole_at(const AcDipoleSet& set, int j, double t) {
  if (j < 0 || j >= set.n()) throw InvalidArgument("ac_dipole_at: index out of range");
  return set.mu_sin[j] * std::sin(set.omega_f * t) + set.mu_cos[j] * std::cos(set.omega_f * t);
}

std::vector<Dipole> ac_dipoles_at(const AcDipoleSet& set, double t) {
  const double s = std::sin(set.omega_f * t);
  const double c = std::cos(set.omega_f * t);
  std::vector<Dipole> out(set.n());
  for (int j = 0; j < set.n(); ++j) out[j] = set.mu_sin[j] * s + set.mu_cos[j] * c;
  return out;
}

std::vector<Wrench> averaged_system_wrench(const AcDipoleSet& set,
                                           const std::vector<Vec3>& positions, double d_min) {
  set.validate();
  std::vector<Wrench> ws = system_wrench_dc(set.mu_sin, positions, d_min);
  const std::vector<Wrench> wc = system_wrench_dc(set.mu_cos, positions, d_min);
  for (std::size_t j = 0; j < ws.size(); ++j) {
    ws[j].force = 0.5 * (ws[j].force + wc[j].force);
    ws[j].torque = 0.5 * (ws[j].torque + wc[j].torque);
  }
  return ws;
}

namespace {

// Continued-fraction search for x ~= p / q with q <= qmax.
bool rational_approx(double x, int qmax, double tol, long* p_out, long* q_out) {
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double y = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(y);
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > qmax) return false;
    if (std::abs(static_cast<double>(p2) / static_cast<double>(q2) - x) <= tol * std::abs(x)) {
      *p_out = p2;
      *q_out = q2;
      return true;
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = y - a;
    if (frac == 0.0) return false;
    y = 1.0 / frac;
  }
  return false;
}

// Mean of cos(w t + theta) over [0, T].
double mean_cos(double w, double theta, double window) {
  if (w == 0.0) return std::cos(theta);
  return (std::sin(w * window + theta) - std::sin(theta)) / (w * window);
}

}  // namespace

ToneAverage two_tone_average(const Dipole& mu_a_amp, const Dipole& mu_b_amp, double omega_a,
                             double omega_b, double theta, const Vec3& r_ba,
                             const ToneAverageOptions& options, double d_min) {
  if (!(omega_a > 0.0) || !(omega_b > 0.0)) {
    throw InvalidArgument("two_tone_average: frequencies must be positive");
  }
  check_pair(r_ba, d_min, 0, 1);
  ToneAverage out;
  if (omega_a == omega_b) {
    out.window = kPi / omega_a;
  } else {
    long p = 0, q = 0;
    if (rational_approx(omega_a / omega_b, options.max_denominator, options.ratio_tolerance, &p,
                        &q)) {
      out.window = 2.0 * kPi * static_cast<double>(q) / omega_b;
    } else {
      const double slow = std::min(omega_a, omega_b);
      out.window = options.horizon > 0.0 ? options.horizon : 1000.0 * 2.0 * kPi / slow;
      out.exact = false;
    }
  }
  // sin(wa t + th) sin(wb t) = (cos((wa - wb) t + th) - cos((wa + wb) t + th)) / 2
  out.factor = 0.5 * (mean_cos(omega_a - omega_b, theta, out.window) -
                      mean_cos(omega_a + omega_b, theta, out.window));
  double f[3], ta[3], tb[3];
  detail::pair_eval(mu_b_amp.data(), mu_a_amp.data(), r_ba.data(), f, ta, tb);
  out.wrench.force = out.factor * Vec3(f[0], f[1], f[2]);
  out.wrench.torque = out.factor * Vec3(ta[0], ta[1], ta[2]);
  return out;
}

}  // namespace emff
