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
#include "emff/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "emff/errors.hpp"

namespace emff {

void AllocationProblem::validate(double balance_tol) const {
  const int nn = n();
  if (nn < 2) throw DimensionError("allocation: need at least two satellites");
  if (static_cast<int>(target_force.size()) != nn - 1 ||
      static_cast<int>(target_torque.size()) != nn) {
    throw DimensionError("allocation: expected n-1 force and n torque targets");
  }
  Vec3 moment = Vec3::Zero();
  double scale = 0.0;
  for (int i = 1; i < nn; ++i) {
    const Vec3 arm = positions[i] - positions[0];
    moment += arm.cross(target_force[i - 1]);
    scale += arm.norm() * target_force[i - 1].norm();
  }
  for (int i = 0; i < nn; ++i) {
    moment += target_torque[i];
    scale += target_torque[i].norm();
  }
  if (moment.norm() > balance_tol * scale) {
    throw InvalidArgument("allocation: targets do not conserve angular momentum (imbalance " +
                          std::to_string(moment.norm()) + " N m)");
  }
}

namespace {

double mean_distance(const std::vector<Vec3>& p) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    for (std::size_t k = j + 1; k < p.size(); ++k) {
      sum += (p[j] - p[k]).norm();
      ++count;
    }
  }
  return count > 0 ? sum / count : 1.0;
}

ProblemScaling make_scaling(double d_ref, double f_ref) {
  ProblemScaling s;
  if (!(f_ref > 0.0) || !(d_ref > 0.0)) return s;
  s.identity = false;
  s.d_ref = d_ref;
  s.f_ref = f_ref;
  s.tau_ref = f_ref * d_ref;
  s.mu_ref = std::sqrt(4.0 * kPi * std::pow(d_ref, 4) * f_ref / (3.0 * kMu0));
  return s;
}

}  // namespace

ProblemScaling scale_problem(const AllocationProblem& problem) {
  const double d = mean_distance(problem.positions);
  double f = 0.0;
  Vec3 f0 = Vec3::Zero();
  for (const auto& v : problem.target_force) {
    f = std::max(f, v.norm());
    f0 -= v;
  }
  f = std::max(f, f0.norm());
  for (const auto& t : problem.target_torque) f = std::max(f, t.norm() / d);
  return make_scaling(d, f);
}

ProblemScaling scale_forces(const std::vector<Vec3>& positions,
                            const std::vector<Vec3>& target_force) {
  const double d = mean_distance(positions);
  double f = 0.0;
  Vec3 f0 = Vec3::Zero();
  for (const auto& v : target_force) {
    f = std::max(f, v.norm());
    f0 -= v;
  }
  f = std::max(f, f0.norm());
  return make_scaling(d, f);
}

VecX stack_ac(const AcDipoleSet& set) {
  const int n = set.n();
  VecX x(6 * n);
  for (int j = 0; j < n; ++j) {
    x.segment<3>(3 * j) = set.mu_sin[j];
    x.segment<3>(3 * n + 3 * j) = set.mu_cos[j];
  }
  return x;
}

AcDipoleSet unstack_ac(const VecX& x, double omega_f) {
  if (x.size() % 6 != 0) throw DimensionError("unstack_ac: size is not a multiple of 6");
  const int n = static_cast<int>(x.size() / 6);
  AcDipoleSet set(n, omega_f);
  for (int j = 0; j < n; ++j) {
    set.mu_sin[j] = x.segment<3>(3 * j);
    set.mu_cos[j] = x.segment<3>(3 * n + 3 * j);
  }
  return set;
}

double ac_objective(const AcDipoleSet& set) { return stack_ac(set).squaredNorm(); }

namespace {

struct PairGeom {
  int j = 0;
  int k = 0;
  PairTensors t;
  Mat3 g;
};

// Pair tensors depend only on the geometry; built once per solve.
std::vector<PairGeom> pair_geometry(const std::vector<Vec3>& positions) {
  const int n = static_cast<int>(positions.size());
  std::vector<PairGeom> out;
  out.reserve(n * (n - 1) / 2);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const Vec3 r = positions[j] - positions[k];
      out.push_back({j, k, pair_tensors(r), field_matrix(r)});
    }
  }
  return out;
}

void stacked_wrench_into(const VecX& mus, const std::vector<PairGeom>& geom, int n,
                         StackedWrench* w) {
  w->force.setZero(3 * n);
  w->torque.setZero(3 * n);
  w->d_force.setZero(3 * n, 3 * n);
  w->d_torque.setZero(3 * n, 3 * n);
  for (const PairGeom& p : geom) {
    const int j = p.j, k = p.k;
    const Vec3 mj = mus.segment<3>(3 * j);
    const Vec3 mk = mus.segment<3>(3 * k);
    Mat3 dfj_dmj, dfj_dmk;
    for (int a = 0; a < 3; ++a) {
      dfj_dmj.row(a) = mk.transpose() * p.t.force[a];
      dfj_dmk.row(a) = mj.transpose() * p.t.force[a];
    }
    const Vec3 fj = dfj_dmj * mj;
    const Vec3 bk = p.g * mk;
    const Vec3 bj = p.g * mj;
    w->force.segment<3>(3 * j) += fj;
    w->force.segment<3>(3 * k) -= fj;
    w->torque.segment<3>(3 * j) += mj.cross(bk);
    w->torque.segment<3>(3 * k) += mk.cross(bj);
    w->d_force.block<3, 3>(3 * j, 3 * j) += dfj_dmj;
    w->d_force.block<3, 3>(3 * j, 3 * k) += dfj_dmk;
    w->d_force.block<3, 3>(3 * k, 3 * j) -= dfj_dmj;
    w->d_force.block<3, 3>(3 * k, 3 * k) -= dfj_dmk;
    w->d_torque.block<3, 3>(3 * j, 3 * j) -= tilde(bk);
    w->d_torque.block<3, 3>(3 * j, 3 * k) += tilde(mj) * p.g;
    w->d_torque.block<3, 3>(3 * k, 3 * k) -= tilde(bj);
    w->d_torque.block<3, 3>(3 * k, 3 * j) += tilde(mk) * p.g;
  }
}

MatX weighted_hessian(const std::vector<PairGeom>& geom, int n, const VecX& w_f, const VecX& w_t) {
  MatX h = MatX::Zero(3 * n, 3 * n);
  for (const PairGeom& p : geom) {
    const int j = p.j, k = p.k;
    Mat3 kj = Mat3::Zero();  // d2 / (d mu_k d mu_j)
    for (int a = 0; a < 3; ++a) {
      kj += (w_f(3 * j + a) - w_f(3 * k + a)) * p.t.force[a];
      kj += w_t(3 * j + a) * p.t.torque[a];
      kj += w_t(3 * k + a) * p.t.torque[a].transpose();
    }
    h.block<3, 3>(3 * k, 3 * j) += kj;
    h.block<3, 3>(3 * j, 3 * k) += kj.transpose();
  }
  return h;
}

}  // namespace

StackedWrench stacked_wrench(const VecX& mus, const std::vector<Vec3>& positions) {
  const int n = static_cast<int>(positions.size());
  if (mus.size() != 3 * n) throw DimensionError("stacked_wrench: dipole count differs from n");
  StackedWrench w;
  stacked_wrench_into(mus, pair_geometry(positions), n, &w);
  return w;
}

MatX weighted_wrench_hessian(const std::vector<Vec3>& positions, const VecX& w_f, const VecX& w_t) {
  const int n = static_cast<int>(positions.size());
  if (w_f.size() != 3 * n || w_t.size() != 3 * n) {
    throw DimensionError("weighted_wrench_hessian: weight size differs from 3n");
  }
  return weighted_hessian(pair_geometry(positions), n, w_f, w_t);
}

namespace {

// min f(x) s.t. c(x) = 0 with exact second derivatives.
struct Nlp {
  int nx = 0;
  int nc = 0;
  std::function<void(const VecX& x, double* f, VecX* grad, VecX* c, MatX* jac)> eval;
  // d2 f + sum_i w_i d2 c_i
  std::function<MatX(const VecX& x, const VecX& w)> hessian;
};

struct AlResult {
  VecX x;
  VecX lambda;
  double rho = 0.0;
  double c_inf = std::numeric_limits<double>::infinity();
  double f = 0.0;
  int iterations = 0;
  bool success = false;     // feasible
  bool stationary = false;  // and a KKT point
};

struct AlOptions {
  double tol_c = 1e-8;
  double tol_g = 1e-6;
  int max_outer = 50;
  int max_inner = 30;
};

double merit(const Nlp& nlp, const VecX& x, const VecX& lambda, double rho, VecX* c_out = nullptr) {
  double f = 0.0;
  VecX c;
  nlp.eval(x, &f, nullptr, &c, nullptr);
  if (c_out) *c_out = c;
  return f + lambda.dot(c) + 0.5 * rho * c.squaredNorm();
}

// Minimum-norm Gauss-Newton steps on c(x) = 0.
int feasibility_newton(const Nlp& nlp, VecX* x, int max_iter, double target) {
  int it = 0;
  for (; it < max_iter; ++it) {
    double f = 0.0;
    VecX c;
    MatX jac;
    nlp.eval(*x, &f, nullptr, &c, &jac);
    const double c0 = c.lpNorm<Eigen::Infinity>();
    if (c0 <= target) break;
    const MatX jjt = jac * jac.transpose();
    Eigen::LDLT<MatX> ldlt(jjt);
    const VecX d = -jac.transpose() * ldlt.solve(c);
    if (!d.allFinite()) break;
    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const VecX xt = *x + alpha * d;
      VecX ct;
      nlp.eval(xt, &f, nullptr, &ct, nullptr);
      if (ct.lpNorm<Eigen::Infinity>() < c0) {
        *x = xt;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;
  }
  return it;
}

// Newton on the KKT conditions from a point near a local minimizer.
// Returns false if it fails to reach tolerance; x and lambda are then unchanged.
bool kkt_newton(const Nlp& nlp, VecX* x, VecX* lambda, const AlOptions& opt, int max_iter,
                int* iterations) {
  VecX xk = *x;
  VecX lk = lambda->size() == nlp.nc ? *lambda : VecX::Zero(nlp.nc);
  const int nx = nlp.nx, nc = nlp.nc;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    double f = 0.0;
    VecX grad, c;
    MatX jac;
    nlp.eval(xk, &f, &grad, &c, &jac);
    ++*iterations;
    const VecX gl = grad + jac.transpose() * lk;
    const double c_inf = c.lpNorm<Eigen::Infinity>();
    const double g_inf = gl.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(c_inf) || !std::isfinite(g_inf)) return false;
    if (c_inf <= 1e-3 * opt.tol_c && g_inf <= 1e-3 * opt.tol_g * std::max(1.0, xk.norm())) {
      *x = xk;
      *lambda = lk;
      return true;
    }
    const double kkt = c_inf + g_inf;
    if (it > 1 && kkt > 0.5 * prev) {
      // Not converging quadratically; accept only if already within tolerance.
      if (c_inf <= opt.tol_c && g_inf <= opt.tol_g * std::max(1.0, xk.norm())) {
        *x = xk;
        *lambda = lk;
        return true;
      }
      return false;
    }
    prev = kkt;
    MatX k = MatX::Zero(nx + nc, nx + nc);
    k.topLeftCorner(nx, nx) = nlp.hessian(xk, lk);
    // The sine/cosine phase rotation leaves the Lagrangian invariant, so the
    // KKT matrix is singular without a small shift.
    const double shift = 1e-9 * (1.0 + k.topLeftCorner(nx, nx).cwiseAbs().maxCoeff());
    k.topLeftCorner(nx, nx).diagonal().array() += shift;
    k.topRightCorner(nx, nc) = jac.transpose();
    k.bottomLeftCorner(nc, nx) = jac;
    VecX rhs(nx + nc);
    rhs.head(nx) = -gl;
    rhs.tail(nc) = -c;
    const Eigen::PartialPivLU<MatX> lu(k);
    const VecX d = lu.solve(rhs);
    if (!d.allFinite()) return false;
    xk += d.head(nx);
    lk += d.tail(nc);
  }
  return false;
}

// Reduced Newton on the manifold c(x) = 0: each step moves in the null space
// of the Jacobian and is pulled back by feasibility_newton. Multipliers are
// the least-squares estimate. Returns true once stationary.
bool manifold_polish(const Nlp& nlp, VecX* x, VecX* lambda, const AlOptions& opt, int max_iter,
                     int* iterations) {
  VecX xk = *x;
  feasibility_newton(nlp, &xk, 20, 1e-3 * opt.tol_c);
  for (int it = 0; it < max_iter; ++it) {
    double f = 0.0;
    VecX grad, c;
    MatX jac;
    nlp.eval(xk, &f, &grad, &c, &jac);
    ++*iterations;
    if (!(c.lpNorm<Eigen::Infinity>() <= opt.tol_c) || !xk.allFinite()) return false;
    const VecX lam = -jac.transpose().completeOrthogonalDecomposition().solve(grad);
    const double g_inf = (grad + jac.transpose() * lam).lpNorm<Eigen::Infinity>();
    const double g_tol = opt.tol_g * std::max(1.0, xk.lpNorm<Eigen::Infinity>());
    if (g_inf <= 1e-3 * g_tol) {
      *x = xk;
      *lambda = lam;
      return true;
    }
    const Eigen::JacobiSVD<MatX> svd(jac, Eigen::ComputeFullV);
    const VecX sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv[rank] > 1e-10 * sv[0]) ++rank;
    const MatX z = svd.matrixV().rightCols(nlp.nx - rank);
    const MatX hr = z.transpose() * nlp.hessian(xk, lam) * z;
    const Eigen::SelfAdjointEigenSolver<MatX> eig(0.5 * (hr + hr.transpose()));
    VecX ev = eig.eigenvalues().cwiseAbs();
    const double floor = 1e-8 * (1.0 + ev.maxCoeff());
    for (int i = 0; i < ev.size(); ++i) ev[i] = std::max(ev[i], floor);
    const VecX gz = z.transpose() * grad;
    const VecX p = -z * (eig.eigenvectors() *
                         (eig.eigenvectors().transpose() * gz).cwiseQuotient(ev));
    const double slope = grad.dot(p);
    bool stepped = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 30 && slope < 0.0; ++ls) {
      VecX xt = xk + alpha * p;
      feasibility_newton(nlp, &xt, 10, 1e-3 * opt.tol_c);
      double ft = 0.0;
      VecX ct;
      nlp.eval(xt, &ft, nullptr, &ct, nullptr);
      if (ct.lpNorm<Eigen::Infinity>() <= opt.tol_c && ft <= f + 1e-4 * alpha * slope) {
        xk = xt;
        stepped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!stepped) {
      // No decrease left at rounding level.
      if (g_inf <= g_tol) {
        *x = xk;
        *lambda = lam;
        return true;
      }
      return false;
    }
  }
  return false;
}

AlResult augmented_lagrangian(const Nlp& nlp, VecX x, VecX lambda, double rho,
                              const AlOptions& opt) {
  AlResult res;
  if (lambda.size() != nlp.nc) lambda = VecX::Zero(nlp.nc);
  const double inner_tol = std::min(1e-10, 1e-4 * opt.tol_g);
  double prev_c = std::numeric_limits<double>::infinity();
  bool stationary = false;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    for (int inner = 0; inner < opt.max_inner; ++inner) {
      double f = 0.0;
      VecX grad, c;
      MatX jac;
      nlp.eval(x, &f, &grad, &c, &jac);
      const VecX w = lambda + rho * c;
      const VecX g = grad + jac.transpose() * w;
      ++res.iterations;
      if (g.lpNorm<Eigen::Infinity>() <= inner_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
        break;
      }
      MatX h = nlp.hessian(x, w) + rho * jac.transpose() * jac;
      const double phi0 = f + lambda.dot(c) + 0.5 * rho * c.squaredNorm();
      double shift = 0.0;
      const double hscale = 1.0 + h.diagonal().cwiseAbs().maxCoeff();
      bool stepped = false;
      bool stalled = false;
      int ls_failures = 0;
      for (int attempt = 0; attempt < 30 && !stepped && !stalled; ++attempt) {
        MatX hs = h;
        hs.diagonal().array() += shift;
        Eigen::LLT<MatX> llt(hs);
        if (llt.info() != Eigen::Success) {
          shift = std::max(10.0 * shift, 1e-10 * hscale);
          continue;
        }
        const VecX d = -llt.solve(g);
        const double slope = g.dot(d);
        // Predicted decrease at rounding level: nothing left to gain.
        if (-slope <= 1e-15 * (1.0 + std::abs(phi0))) {
          stalled = true;
          break;
        }
        double alpha = 1.0;
        for (int ls = 0; ls < 20; ++ls) {
          const VecX xt = x + alpha * d;
          const double phi = merit(nlp, xt, lambda, rho);
          if (std::isfinite(phi) && phi <= phi0 + 1e-4 * alpha * slope) {
            x = xt;
            stepped = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!stepped) {
          if (++ls_failures >= 3) break;
          shift = std::max(10.0 * shift, 1e-8 * hscale);
        }
      }
      if (!stepped) break;
    }
    VecX grad, c;
    MatX jac;
    nlp.eval(x, &res.f, &grad, &c, &jac);
    const double c_inf = c.lpNorm<Eigen::Infinity>();
    lambda += rho * c;
    res.c_inf = c_inf;
    // A feasible point is only accepted once it is also stationary.
    const double g_inf = (grad + jac.transpose() * lambda).lpNorm<Eigen::Infinity>();
    if (c_inf <= opt.tol_c) {
      // Feasible but not yet stationary: the penalty is usually large by now,
      // so finish on the constraint manifold instead.
      stationary = g_inf <= opt.tol_g * std::max(1.0, x.lpNorm<Eigen::Infinity>());
      break;
    }
    if (c_inf > 0.25 * prev_c) rho = std::min(rho * 10.0, 1e12);
    prev_c = c_inf;
  }
  if (!stationary && res.c_inf <= 1e-2) {
    stationary = manifold_polish(nlp, &x, &lambda, opt, 100, &res.iterations);
  }
  // Tighten feasibility without moving far from the stationary point.
  feasibility_newton(nlp, &x, 5, 1e-3 * opt.tol_c);
  VecX c;
  nlp.eval(x, &res.f, nullptr, &c, nullptr);
  res.c_inf = c.lpNorm<Eigen::Infinity>();
  res.success = res.c_inf <= opt.tol_c && x.allFinite();
  res.stationary = stationary && res.success;
  res.x = x;
  res.lambda = lambda;
  res.rho = rho;
  return res;
}

std::mt19937_64 step_rng(std::uint64_t seed, std::uint64_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
  return std::mt19937_64(seq);
}

VecX uniform_seed(std::mt19937_64& rng, int size) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VecX x(size);
  for (int i = 0; i < size; ++i) x(i) = u(rng);
  return x;
}

struct AcModel {
  const AllocationProblem* problem = nullptr;
  ProblemScaling sc;
  double weight = 1.0;
  int n = 0;
  std::vector<PairGeom> geom;

  // Scaled constraint values and Jacobian w.r.t. physical amplitudes.
  void constraints(const VecX& x_phys, VecX* c, MatX* jac_phys) const {
    StackedWrench ws, wc;
    stacked_wrench_into(x_phys.head(3 * n), geom, n, &ws);
    stacked_wrench_into(x_phys.tail(3 * n), geom, n, &wc);
    const int nc = 6 * (n - 1);
    c->resize(nc);
    if (jac_phys) jac_phys->resize(nc, 6 * n);
    for (int i = 1; i < n; ++i) {
      const int rf = 6 * (i - 1);
      const int rt = rf + 3;
      c->segment<3>(rf) =
          (0.5 * (ws.force.segment<3>(3 * i) + wc.force.segment<3>(3 * i)) -
           problem->target_force[i - 1]) / sc.f_ref;
      c->segment<3>(rt) =
          (0.5 * (ws.torque.segment<3>(3 * i) + wc.torque.segment<3>(3 * i)) -
           problem->target_torque[i]) / sc.tau_ref;
      if (jac_phys) {
        jac_phys->block(rf, 0, 3, 3 * n) = (0.5 / sc.f_ref) * ws.d_force.middleRows<3>(3 * i);
        jac_phys->block(rf, 3 * n, 3, 3 * n) = (0.5 / sc.f_ref) * wc.d_force.middleRows<3>(3 * i);
        jac_phys->block(rt, 0, 3, 3 * n) = (0.5 / sc.tau_ref) * ws.d_torque.middleRows<3>(3 * i);
        jac_phys->block(rt, 3 * n, 3, 3 * n) = (0.5 / sc.tau_ref) * wc.d_torque.middleRows<3>(3 * i);
      }
    }
  }

  Nlp nlp() const {
    Nlp p;
    p.nx = 6 * n;
    p.nc = 6 * (n - 1);
    p.eval = [this](const VecX& xs, double* f, VecX* grad, VecX* c, MatX* jac) {
      const VecX xp = sc.from_scaled(xs);
      *f = 0.5 * weight * xs.squaredNorm();
      if (grad) *grad = weight * xs;
      if (jac) {
        constraints(xp, c, jac);
        *jac *= sc.mu_ref;
      } else {
        constraints(xp, c, nullptr);
      }
    };
    p.hessian = [this](const VecX&, const VecX& w) {
      VecX wf = VecX::Zero(3 * n), wt = VecX::Zero(3 * n);
      for (int i = 1; i < n; ++i) {
        wf.segment<3>(3 * i) = w.segment<3>(6 * (i - 1)) / sc.f_ref;
        wt.segment<3>(3 * i) = w.segment<3>(6 * (i - 1) + 3) / sc.tau_ref;
      }
      const MatX hh = (0.5 * sc.mu_ref * sc.mu_ref) * weighted_hessian(geom, n, wf, wt);
      MatX h = MatX::Zero(6 * n, 6 * n);
      h.topLeftCorner(3 * n, 3 * n) = hh;
      h.bottomRightCorner(3 * n, 3 * n) = hh;
      h.diagonal().array() += weight;
      return h;
    };
    return p;
  }

  // lambda_scaled = lambda_phys .* factor
  VecX multiplier_factor() const {
    VecX fac(6 * (n - 1));
    const double mu2 = sc.mu_ref * sc.mu_ref;
    for (int i = 1; i < n; ++i) {
      fac.segment<3>(6 * (i - 1)).setConstant(sc.f_ref / mu2);
      fac.segment<3>(6 * (i - 1) + 3).setConstant(sc.tau_ref / mu2);
    }
    return fac;
  }
};

bool within_limits(const AcDipoleSet& set, double mu_max) {
  if (!std::isfinite(mu_max)) return true;
  for (int j = 0; j < set.n(); ++j) {
    if (std::sqrt(set.mu_sin[j].squaredNorm() + set.mu_cos[j].squaredNorm()) > mu_max) return false;
  }
  return true;
}

}  // namespace

ResidualJacobian residual_and_jacobian(const VecX& x, const AllocationProblem& problem,
                                       const ProblemScaling& scaling) {
  const int n = problem.n();
  if (x.size() != 6 * n) throw DimensionError("residual_and_jacobian: x must have 6n entries");
  if (static_cast<int>(problem.target_force.size()) != n - 1 ||
      static_cast<int>(problem.target_torque.size()) != n) {
    throw DimensionError("residual_and_jacobian: target shape mismatch");
  }
  check_far_field(problem.positions, problem.d_min);
  AcModel model;
  model.problem = &problem;
  model.sc = scaling;
  model.n = n;
  model.geom = pair_geometry(problem.positions);
  ResidualJacobian out;
  model.constraints(x, &out.residual, &out.jacobian);
  return out;
}

ResidualJacobian residual_and_jacobian(const VecX& x, const AllocationProblem& problem) {
  return residual_and_jacobian(x, problem, scale_problem(problem));
}

AllocationSolution solve_ac_allocation(const AllocationProblem& problem,
                                       const AllocationSettings& settings, double omega_f,
                                       const AllocationWarmStart* warm) {
  problem.validate();
  check_far_field(problem.positions, problem.d_min);
  const int n = problem.n();
  AllocationSolution best;
  best.dipoles = AcDipoleSet(n, omega_f);

  const ProblemScaling sc = scale_problem(problem);
  if (sc.identity) {
    // All targets zero: the zero dipole set is feasible and optimal.
    best.success = true;
    best.warm.x = VecX::Zero(6 * n);
    best.warm.multipliers = VecX::Zero(6 * (n - 1));
    best.warm.penalty = settings.initial_penalty;
    return best;
  }

  AcModel model;
  model.problem = &problem;
  model.sc = sc;
  model.weight = settings.objective_weight;
  model.n = n;
  model.geom = pair_geometry(problem.positions);
  const Nlp nlp = model.nlp();
  const VecX lam_fac = model.multiplier_factor();
  AlOptions opt;
  opt.tol_c = settings.constraint_tol;
  opt.tol_g = settings.gradient_tol;
  opt.max_outer = settings.max_outer;
  opt.max_inner = settings.max_inner;

  bool have_best = false;
  bool best_stat = false;
  double best_obj = std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  int total_iters = 0;

  auto attempt = [&](const VecX& x0_scaled, const VecX& lam0_scaled, double rho0, bool from_warm) {
    VecX x;
    VecX lam = lam0_scaled;
    double rho = rho0;
    int iters = 0;
    double c_inf = 0.0;
    bool ok = false;
    bool stat = true;  // a pure feasibility solve has nothing to optimize
    if (settings.objective_weight == 0.0) {
      x = x0_scaled;
      iters = feasibility_newton(nlp, &x, settings.max_outer * settings.max_inner,
                                 1e-3 * settings.constraint_tol);
      double f;
      VecX c;
      nlp.eval(x, &f, nullptr, &c, nullptr);
      c_inf = c.lpNorm<Eigen::Infinity>();
      ok = c_inf <= settings.constraint_tol && x.allFinite();
    } else {
      x = x0_scaled;
      if (from_warm && kkt_newton(nlp, &x, &lam, opt, 8, &iters)) {
        ok = true;
      } else {
        const AlResult r = augmented_lagrangian(nlp, x0_scaled, lam0_scaled, rho0, opt);
        x = r.x;
        lam = r.lambda;
        rho = r.rho;
        iters += r.iterations;
        ok = r.success;
        stat = r.stationary;
        if (ok && kkt_newton(nlp, &x, &lam, opt, 8, &iters)) stat = true;
      }
      iters += feasibility_newton(nlp, &x, 5, 1e-3 * opt.tol_c);
      double f;
      VecX c;
      nlp.eval(x, &f, nullptr, &c, nullptr);
      c_inf = c.lpNorm<Eigen::Infinity>();
      ok = ok && c_inf <= settings.constraint_tol && x.allFinite();
    }
    total_iters += iters;
    best_res = std::min(best_res, c_inf);
    if (!ok) return false;
    const VecX xp = sc.from_scaled(x);
    AcDipoleSet set = unstack_ac(xp, omega_f);
    const bool limits = within_limits(set, problem.mu_max);
    const double obj = xp.squaredNorm();
    // Within limits first, then stationary, then the lower objective.
    const bool better = !have_best || (limits && !best.within_limits) ||
                        (limits == best.within_limits &&
                         ((stat && !best_stat) || (stat == best_stat && obj < best_obj)));
    if (better) {
      have_best = true;
      best_stat = stat;
      best_obj = obj;
      best.dipoles = std::move(set);
      best.residual = c_inf;
      best.objective = obj;
      best.within_limits = limits;
      best.warm.x = xp;
      best.warm.multipliers = lam.cwiseQuotient(lam_fac);
      best.warm.penalty = rho;
    }
    return limits && stat;
  };

  bool done = false;
  if (warm && warm->x.size() == 6 * n && warm->x.squaredNorm() > 0.0 && warm->x.allFinite()) {
    VecX lam0 = VecX::Zero(6 * (n - 1));
    if (warm->multipliers.size() == lam0.size() && warm->multipliers.allFinite()) {
      lam0 = warm->multipliers.cwiseProduct(lam_fac);
    }
    const double rho0 = std::clamp(warm->penalty, settings.initial_penalty, 100.0 * settings.initial_penalty);
    done = attempt(sc.to_scaled(warm->x), lam0, rho0, true);
    if (done) {
      best.restarts_used = 0;
    }
  }
  if (!done) {
    const bool cold = !(warm && warm->x.size() == 6 * n && warm->x.squaredNorm() > 0.0);
    std::mt19937_64 rng = step_rng(settings.seed, settings.step_index);
    const int k = std::max(1, settings.restarts);
    int used = 0;
    for (int s = 0; s < k; ++s) {
      const VecX x0 = uniform_seed(rng, 6 * n);
      ++used;
      const bool ok = attempt(x0, VecX::Zero(6 * (n - 1)), settings.initial_penalty, false);
      if (ok && !(cold && settings.multi_start_cold)) break;
    }
    best.restarts_used = cold ? used - 1 : used;
  }
  best.iterations = total_iters;
  if (!have_best) {
    throw NoFeasibleSolution("AC allocation failed after all restarts (best residual " +
                                 std::to_string(best_res) + ")",
                             best_res);
  }
  best.success = true;
  return best;
}

DcAllocation solve_dc_allocation(const std::vector<Vec3>& positions,
                                 const std::vector<Vec3>& target_force,
                                 const AllocationSettings& settings, double d_min,
                                 const AllocationWarmStart* warm) {
  const int n = static_cast<int>(positions.size());
  if (n < 2 || static_cast<int>(target_force.size()) != n - 1) {
    throw DimensionError("solve_dc_allocation: expected n >= 2 and n-1 force targets");
  }
  check_far_field(positions, d_min);
  DcAllocation out;
  out.mus.assign(n, Vec3::Zero());
  out.forces.assign(n, Vec3::Zero());
  out.torques.assign(n, Vec3::Zero());
  const ProblemScaling sc = scale_forces(positions, target_force);
  if (sc.identity) {
    out.warm.x = VecX::Zero(3 * n);
    out.warm.multipliers = VecX::Zero(3 * (n - 1));
    out.warm.penalty = settings.initial_penalty;
    return out;
  }
  const double eps = settings.dc_regularization;
  const std::vector<PairGeom> geom = pair_geometry(positions);
  const double mu2 = sc.mu_ref * sc.mu_ref;

  Nlp nlp;
  nlp.nx = 3 * n;
  nlp.nc = 3 * (n - 1);
  nlp.eval = [&](const VecX& xs, double* f, VecX* grad, VecX* c, MatX* jac) {
    StackedWrench w;
    stacked_wrench_into(sc.from_scaled(xs), geom, n, &w);
    const VecX tau = w.torque / sc.tau_ref;
    *f = 0.5 * tau.squaredNorm() + 0.5 * eps * xs.squaredNorm();
    if (grad) *grad = (sc.mu_ref / sc.tau_ref) * (w.d_torque.transpose() * tau) + eps * xs;
    c->resize(3 * (n - 1));
    for (int i = 1; i < n; ++i) {
      c->segment<3>(3 * (i - 1)) = (w.force.segment<3>(3 * i) - target_force[i - 1]) / sc.f_ref;
    }
    if (jac) *jac = (sc.mu_ref / sc.f_ref) * w.d_force.bottomRows(3 * (n - 1));
  };
  nlp.hessian = [&](const VecX& xs, const VecX& wc) {
    StackedWrench w;
    stacked_wrench_into(sc.from_scaled(xs), geom, n, &w);
    const MatX jt = (sc.mu_ref / sc.tau_ref) * w.d_torque;
    VecX wf = VecX::Zero(3 * n);
    wf.tail(3 * (n - 1)) = wc / sc.f_ref;
    const VecX wt = (w.torque / sc.tau_ref) / sc.tau_ref;
    MatX h = jt.transpose() * jt + mu2 * weighted_hessian(geom, n, wf, wt);
    h.diagonal().array() += eps;
    return h;
  };
  // lambda_scaled = lambda_phys * f_ref / tau_ref^2
  const double lam_fac = sc.f_ref / (sc.tau_ref * sc.tau_ref);

  AlOptions opt;
  opt.tol_c = settings.constraint_tol;
  opt.tol_g = settings.gradient_tol;
  opt.max_outer = settings.max_outer;
  opt.max_inner = settings.max_inner;

  bool have = false;
  double best_f = std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  AlResult best;
  auto attempt = [&](const VecX& x0, const VecX& lam0, double rho0, bool from_warm) {
    AlResult r;
    int iters = 0;
    r.x = x0;
    r.lambda = lam0;
    r.rho = rho0;
    if (from_warm && kkt_newton(nlp, &r.x, &r.lambda, opt, 8, &iters)) {
      r.success = true;
      r.stationary = true;
    } else {
      r = augmented_lagrangian(nlp, x0, lam0, rho0, opt);
      if (r.success && kkt_newton(nlp, &r.x, &r.lambda, opt, 8, &iters)) r.stationary = true;
    }
    iters += feasibility_newton(nlp, &r.x, 5, 1e-3 * opt.tol_c);
    VecX c;
    nlp.eval(r.x, &r.f, nullptr, &c, nullptr);
    r.c_inf = c.lpNorm<Eigen::Infinity>();
    r.success = r.success && r.c_inf <= opt.tol_c && r.x.allFinite();
    out.iterations += r.iterations + iters;
    best_res = std::min(best_res, r.c_inf);
    if (!r.success) return false;
    if (!have || (r.stationary && !best.stationary) ||
        (r.stationary == best.stationary && r.f < best_f)) {
      have = true;
      best_f = r.f;
      best = r;
    }
    return r.stationary;
  };

  bool done = false;
  const bool warm_ok = warm && warm->x.size() == 3 * n && warm->x.squaredNorm() > 0.0 &&
                       warm->x.allFinite();
  if (warm_ok) {
    VecX lam0 = VecX::Zero(3 * (n - 1));
    if (warm->multipliers.size() == lam0.size()) lam0 = warm->multipliers * lam_fac;
    done = attempt(sc.to_scaled(warm->x), lam0,
                   std::clamp(warm->penalty, settings.initial_penalty, 100.0 * settings.initial_penalty),
                   true);
  }
  if (!done) {
    std::mt19937_64 rng = step_rng(settings.seed ^ 0x9e3779b97f4a7c15ULL, settings.step_index);
    const int k = std::max(1, settings.restarts);
    for (int s = 0; s < k; ++s) {
      ++out.restarts_used;
      const bool ok = attempt(uniform_seed(rng, 3 * n), VecX::Zero(3 * (n - 1)),
                              settings.initial_penalty, false);
      if (ok && !(!warm_ok && settings.multi_start_cold)) break;
    }
    if (!warm_ok) --out.restarts_used;
  }
  if (!have) {
    throw NoFeasibleSolution("DC allocation failed after all restarts (best residual " +
                                 std::to_string(best_res) + ")",
                             best_res);
  }
  const VecX xp = sc.from_scaled(best.x);
  const StackedWrench w = stacked_wrench(xp, positions);
  for (int j = 0; j < n; ++j) {
    out.mus[j] = xp.segment<3>(3 * j);
    out.forces[j] = w.force.segment<3>(3 * j);
    out.torques[j] = w.torque.segment<3>(3 * j);
  }
  out.residual = best.c_inf;
  out.torque_norm_sq = w.torque.squaredNorm();
  out.warm.x = xp;
  out.warm.multipliers = best.lambda / lam_fac;
  out.warm.penalty = best.rho;
  return out;
}

}  // namespace emff
