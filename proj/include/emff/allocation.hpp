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

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "emff/magnetics.hpp"

namespace emff {

struct AllocationProblem {
  std::vector<Vec3> positions;      // n, I frame
  std::vector<Vec3> target_force;   // satellites 1..n-1, I frame
  std::vector<Vec3> target_torque;  // all n, I frame
  double mu_max = std::numeric_limits<double>::infinity();
  double d_min = kDefaultMinSeparation;

  int n() const { return static_cast<int>(positions.size()); }
  // Throws DimensionError on shape mismatch and InvalidArgument when the
  // implied system wrench does not vanish.
  void validate(double balance_tol = 1e-8) const;
};

struct AllocationSettings {
  double constraint_tol = 1e-8;  // scaled, infinity norm
  double gradient_tol = 1e-6;
  int max_outer = 50;
  int max_inner = 30;
  int restarts = 8;
  std::uint64_t seed = 0;
  std::uint64_t step_index = 0;
  double initial_penalty = 10.0;
  // 1 gives the power-optimal problem, 0 a pure feasibility solve.
  double objective_weight = 1.0;
  // Try every seed on a cold start and keep the best feasible point.
  bool multi_start_cold = true;
  double dc_regularization = 1e-8;
};

struct AllocationWarmStart {
  VecX x;            // physical stacked amplitudes
  VecX multipliers;
  double penalty = 0.0;
};

struct AllocationSolution {
  AcDipoleSet dipoles;
  double residual = 0.0;   // scaled constraint violation, infinity norm
  double objective = 0.0;  // sum of squared amplitudes [(A m^2)^2]
  int iterations = 0;
  int restarts_used = 0;
  bool success = false;
  bool within_limits = true;
  AllocationWarmStart warm;  // feed to the next solve
};

// Characteristic scales used to nondimensionalize the allocation.
struct ProblemScaling {
  double d_ref = 1.0;
  double f_ref = 1.0;
  double tau_ref = 1.0;
  double mu_ref = 1.0;
  bool identity = true;

  VecX to_scaled(const VecX& x) const { return x / mu_ref; }
  VecX from_scaled(const VecX& xs) const { return xs * mu_ref; }
};

ProblemScaling scale_problem(const AllocationProblem& problem);
// Scales for a force-only problem (DC baseline).
ProblemScaling scale_forces(const std::vector<Vec3>& positions,
                            const std::vector<Vec3>& target_force);

// Stacks [mu_sin; mu_cos] into 6n amplitudes and back.
VecX stack_ac(const AcDipoleSet& set);
AcDipoleSet unstack_ac(const VecX& x, double omega_f);
double ac_objective(const AcDipoleSet& set);

struct ResidualJacobian {
  VecX residual;  // 6(n-1), scaled
  MatX jacobian;  // d residual / d x, x in A m^2
};
// x stacks 6n physical amplitudes. Uses scale_problem(problem) for the scaling.
ResidualJacobian residual_and_jacobian(const VecX& x, const AllocationProblem& problem);
ResidualJacobian residual_and_jacobian(const VecX& x, const AllocationProblem& problem,
                                       const ProblemScaling& scaling);

// Throws NoFeasibleSolution when every start fails.
AllocationSolution solve_ac_allocation(const AllocationProblem& problem,
                                       const AllocationSettings& settings, double omega_f,
                                       const AllocationWarmStart* warm = nullptr);

struct DcAllocation {
  std::vector<Dipole> mus;       // n, I frame
  std::vector<Vec3> forces;      // achieved, all n
  std::vector<Vec3> torques;     // achieved, all n, I frame
  double residual = 0.0;         // scaled force violation
  double torque_norm_sq = 0.0;
  int iterations = 0;
  int restarts_used = 0;
  AllocationWarmStart warm;
};

// Minimizes the sum of squared EM torques subject to the forces on satellites 1..n-1.
DcAllocation solve_dc_allocation(const std::vector<Vec3>& positions,
                                 const std::vector<Vec3>& target_force,
                                 const AllocationSettings& settings,
                                 double d_min = kDefaultMinSeparation,
                                 const AllocationWarmStart* warm = nullptr);

// Sum of w_f . d2 f + w_t . d2 tau over all satellites for a single DC dipole
// set; w_f and w_t stack one 3-vector per satellite. Constant in the dipoles.
MatX weighted_wrench_hessian(const std::vector<Vec3>& positions, const VecX& w_f, const VecX& w_t);

// Stacked DC forces and torques with their Jacobians (each 3n x 3n).
struct StackedWrench {
  VecX force;
  VecX torque;
  MatX d_force;
  MatX d_torque;
};
StackedWrench stacked_wrench(const VecX& mus, const std::vector<Vec3>& positions);

}  // namespace emff
