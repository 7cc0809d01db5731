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
#include "emff/runner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emff/errors.hpp"
#include "json.hpp"

namespace emff {

namespace {

struct StepOutput {
  DipoleDrive drive;
  std::vector<Vec3> rw_torques;
  std::vector<double> force_cmd;
  std::vector<double> torque_cmd;
  double V = kNaN;
  double V_dot = kNaN;
  double momentum_residual = kNaN;
  double alloc_residual = 0.0;
  int restarts = 0;
  bool saturated = false;
};

class Loop {
 public:
  Loop(const ScenarioConfig& cfg)
      : cfg_(cfg),
        n_(cfg.n()),
        m_(cfg.m()),
        d_min_(min_separation(cfg.sats)),
        gains_(ControlGains::uniform(cfg.n(), cfg.m(), cfg.k1, cfg.k2_motion, cfg.k2_xi)),
        targets_(TargetSet::from_positions(cfg.target_positions, cfg.target_attitudes)) {}

  StepOutput step(const SystemState& s, std::int64_t k) {
    StepOutput out;
    out.drive.ac = AcDipoleSet(n_, cfg_.omega_f);
    out.drive.dc = unloading_dipoles(s);
    out.rw_torques.assign(n_, Vec3::Zero());
    out.force_cmd.assign(n_, 0.0);
    out.torque_cmd.assign(n_, 0.0);
    // Feed-forward at the mid-step orbit phase: the command is held for dt.
    SystemState s_ff = s;
    s_ff.t += 0.5 * cfg_.dt;
    const std::vector<Vec3> tau_dist = averaged_disturbance_torques(s_ff, cfg_.sats, out.drive.dc,
                                                                    cfg_.disturbances);
    const std::vector<Vec3> f_dist = tidal_forces(s_ff, cfg_.sats, cfg_.disturbances);
    AllocationSettings settings = cfg_.alloc;
    settings.seed = cfg_.seed;
    settings.step_index = static_cast<std::uint64_t>(k);
    if (cfg_.controller == ControllerKind::kProposed) {
      proposed(s, tau_dist, f_dist, settings, &out);
    } else {
      conventional(s, tau_dist, f_dist, settings, &out);
    }
    for (int j = 0; j < n_; ++j) {
      if (s.sats[j].h.norm() > cfg_.sats[j].rw_h_max) out.saturated = true;
    }
    return out;
  }

 private:
  std::vector<Dipole> unloading_dipoles(const SystemState& s) const {
    if (!cfg_.unloading) return {};
    std::vector<Dipole> dc(n_, Vec3::Zero());
    const int c = cfg_.chief();
    const SatelliteState& sc = s.sats[c];
    const Dcm dcm = mrp_to_dcm(sc.sigma);
    const Vec3 b_body = dcm.transpose() * geomagnetic_field(s.orbit.position(s.t) + sc.r);
    dc[c] = dcm * mtq_unloading_dipole(sc.h, b_body, cfg_.k_dc);
    return dc;
  }

  void proposed(const SystemState& s, const std::vector<Vec3>& tau_dist,
                const std::vector<Vec3>& f_dist, AllocationSettings& settings, StepOutput* out) {
    const KinematicsWorkspace ws = build_workspace(s, cfg_.sats, m_);
    const VecX u_d = assemble_disturbance(s, cfg_.sats, m_, tau_dist, f_dist);
    const ReducedStates rs = reduced_states(s, cfg_.sats, m_, targets_.L_d);
    ControlCommand cmd =
        cfg_.hold == HoldKind::kMidpoint
            ? kinematics_control_midpoint(ws, rs.q_s, rs.v, targets_, gains_, u_d, cfg_.dt)
            : kinematics_control(ws, rs.q_s, rs.v, targets_, gains_, u_d);

    // Uniform scaling keeps R u_c = 0, which per-satellite clipping would break.
    double scale = 1.0;
    const std::vector<Vec3> forces = cmd.all_forces();
    for (int j = 0; j < n_; ++j) {
      const double fn = forces[j].norm(), tn = cmd.tau_c[j].norm();
      if (fn > cfg_.force_max) scale = std::min(scale, cfg_.force_max / fn);
      if (tn > cfg_.torque_max) scale = std::min(scale, cfg_.torque_max / tn);
    }
    if (scale < 1.0) {
      cmd.u_c *= scale;
      for (auto& f : cmd.f_c) f *= scale;
      for (auto& t : cmd.tau_c) t *= scale;
      for (auto& h : cmd.h_dot) h *= scale;
      out->saturated = true;
    }

    const KinematicsLayout& lay = ws.layout;
    double terms = 0.0;
    for (int i = 1; i < n_; ++i) {
      terms += (ws.R.middleCols<3>(lay.pos(i)) * cmd.u_c.segment<3>(lay.pos(i))).norm();
    }
    for (int i = 0; i < n_; ++i) {
      terms += (ws.R.middleCols<3>(lay.att(i)) * cmd.u_c.segment<3>(lay.att(i))).norm();
    }
    const double mom = (ws.R * cmd.u_c).norm();
    out->momentum_residual = terms > 0.0 ? mom / terms : mom;
    out->V = lyapunov_value(ws, rs.q_s, rs.v, targets_, gains_);
    out->V_dot = lyapunov_rate(rs.v, targets_, gains_);

    AllocationProblem problem;
    problem.positions = s.positions();
    problem.target_force = cmd.f_c;
    problem.target_torque.resize(n_);
    for (int j = 0; j < n_; ++j) {
      problem.target_torque[j] = mrp_to_dcm(s.sats[j].sigma) * cmd.tau_c[j];
      problem.mu_max = std::min(problem.mu_max, cfg_.sats[j].mu_max);
    }
    problem.d_min = d_min_;
    settings.objective_weight = cfg_.allocation == AllocationKind::kAcFeasibility ? 0.0 : 1.0;
    AllocationSolution sol = solve_ac_allocation(problem, settings, cfg_.omega_f,
                                                 has_warm_ ? &warm_ : nullptr);
    warm_ = sol.warm;
    has_warm_ = true;
    out->drive.ac = std::move(sol.dipoles);
    out->alloc_residual = sol.residual;
    out->restarts = sol.restarts_used;
    if (!sol.within_limits) out->saturated = true;
    for (int j = 0; j < m_; ++j) out->rw_torques[j] = cmd.h_dot[j];
    for (int j = 0; j < n_; ++j) {
      out->force_cmd[j] = forces[j].norm() * scale;
      out->torque_cmd[j] = cmd.tau_c[j].norm();
    }
  }

  void conventional(const SystemState& s, const std::vector<Vec3>& tau_dist,
                    const std::vector<Vec3>& f_dist, const AllocationSettings& settings,
                    StepOutput* out) {
    std::vector<Vec3> forces =
        conventional_forces(s, cfg_.sats, cfg_.target_positions, cfg_.baseline, f_dist);
    double scale = 1.0;
    for (const auto& f : forces) {
      if (f.norm() > cfg_.force_max) scale = std::min(scale, cfg_.force_max / f.norm());
    }
    if (scale < 1.0) {
      for (auto& f : forces) f *= scale;
      out->saturated = true;
    }
    const std::vector<Vec3> f_targets(forces.begin() + 1, forces.end());
    const DcAllocation dc = solve_dc_allocation(s.positions(), f_targets, settings, d_min_,
                                                has_warm_ ? &warm_ : nullptr);
    warm_ = dc.warm;
    has_warm_ = true;
    std::vector<Vec3> tau_meas(n_);
    for (int j = 0; j < n_; ++j) {
      const Dcm c = mrp_to_dcm(s.sats[j].sigma);
      tau_meas[j] = c.transpose() * dc.torques[j] + tau_dist[j];
      // Time-averaged square of sqrt(2) mu sin(wt) equals |mu|^2.
      out->drive.ac.mu_sin[j] = std::sqrt(2.0) * dc.mus[j];
      out->force_cmd[j] = dc.forces[j].norm();
      out->torque_cmd[j] = dc.torques[j].norm();
    }
    out->rw_torques = conventional_rw_torques(s, cfg_.sats, cfg_.baseline, tau_meas);
    out->alloc_residual = dc.residual;
    out->restarts = dc.restarts_used;
  }

  const ScenarioConfig& cfg_;
  int n_;
  int m_;
  double d_min_;
  ControlGains gains_;
  TargetSet targets_;
  AllocationWarmStart warm_;
  bool has_warm_ = false;
};

SatFrame sat_frame(const SatelliteState& s) {
  SatFrame f;
  f.r = s.r;
  f.v = s.v;
  f.sigma = s.sigma;
  f.omega = s.omega;
  f.h = s.h;
  return f;
}

struct Window {
  double alloc_residual = 0.0;
  std::int64_t restarts = 0;
  double momentum_residual = 0.0;
  double energy = 0.0;
  bool saturated = false;
  bool momentum_seen = false;

  void add(const StepOutput& o, double dt) {
    alloc_residual = std::max(alloc_residual, o.alloc_residual);
    restarts += o.restarts;
    if (std::isfinite(o.momentum_residual)) {
      momentum_residual = std::max(momentum_residual, o.momentum_residual);
      momentum_seen = true;
    }
    double e = 0.0;
    for (int j = 0; j < o.drive.ac.n(); ++j) {
      e += 0.5 * (o.drive.ac.mu_sin[j].squaredNorm() + o.drive.ac.mu_cos[j].squaredNorm());
      if (!o.drive.dc.empty()) e += o.drive.dc[j].squaredNorm();
    }
    energy += e * dt;
    saturated = saturated || o.saturated;
  }

  void flush(TelemetryFrame* f) {
    f->alloc_residual = alloc_residual;
    f->alloc_restarts = restarts;
    f->momentum_residual = momentum_seen ? momentum_residual : kNaN;
    f->energy_increment = energy;
    f->saturated = saturated;
    *this = Window{};
  }
};

TelemetryFrame make_frame(const SystemState& s, const std::vector<SatelliteConfig>& cfgs,
                          std::int64_t step) {
  TelemetryFrame f;
  f.t = s.t;
  f.step = step;
  f.L = angular_momentum(s, cfgs);
  for (const auto& sj : s.sats) f.sats.push_back(sat_frame(sj));
  return f;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, initial_state(cfg)); }

RunResult run_scenario(const ScenarioConfig& cfg, const SystemState& initial) {
  cfg.validate();
  if (initial.n() != cfg.n()) throw DimensionError("run_scenario: initial state size differs from n");
  RunResult res;
  res.meta.scenario = cfg.name;
  res.meta.n = cfg.n();
  res.meta.m = cfg.m();
  res.meta.seed = cfg.seed;
  res.meta.dt = cfg.dt;
  res.meta.record_every = cfg.record_every;
  res.meta.mode = cfg.mode == DriveMode::kAveraged ? "averaged" : "instantaneous";
  res.meta.controller = cfg.controller == ControllerKind::kProposed ? "proposed" : "conventional";

  const std::int64_t steps = std::max<std::int64_t>(1, std::llround(cfg.duration() / cfg.dt));
  int sub = 1;
  if (cfg.mode == DriveMode::kInstantaneous) {
    const double limit = (2.0 * kPi / cfg.omega_f) / 20.0;
    sub = static_cast<int>(std::ceil(cfg.dt / limit - 1e-9));
  }
  Loop loop(cfg);
  SystemState s = initial;
  s.t = 0.0;
  Window window;
  std::int64_t k = 0;
  try {
    for (; k < steps; ++k) {
      const StepOutput o = loop.step(s, k);
      window.add(o, cfg.dt);
      if (k % cfg.record_every == 0) {
        TelemetryFrame f = make_frame(s, cfg.sats, k);
        for (int j = 0; j < cfg.n(); ++j) {
          f.sats[j].mu_sin = o.drive.ac.mu_sin[j];
          f.sats[j].mu_cos = o.drive.ac.mu_cos[j];
          if (!o.drive.dc.empty()) f.sats[j].mu_dc = o.drive.dc[j];
          f.sats[j].force_cmd = o.force_cmd[j];
          f.sats[j].torque_cmd = o.torque_cmd[j];
        }
        f.V = o.V;
        f.V_dot = o.V_dot;
        window.flush(&f);
        res.frames.push_back(std::move(f));
      }
      const double h = cfg.dt / sub;
      for (int i = 0; i < sub; ++i) {
        s = propagate(s, cfg.sats, o.drive, o.rw_torques, h, cfg.mode, cfg.disturbances);
      }
      s.t = static_cast<double>(k + 1) * cfg.dt;
    }
  } catch (const Error& e) {
    res.ok = false;
    res.failed_step = k;
    std::ostringstream msg;
    msg << "step " << k << " (t = " << s.t << " s): " << e.what();
    res.error = msg.str();
  }
  res.steps = k;
  TelemetryFrame last = make_frame(s, cfg.sats, k);
  if (!res.frames.empty() && res.frames.back().step == k) res.frames.pop_back();
  window.flush(&last);
  res.frames.push_back(std::move(last));
  res.final_state = s;
  return res;
}

double rw_nonuniformity(const TelemetryFrame& f, int m) {
  double worst = 0.0;
  for (int j = 0; j < m; ++j) {
    const Vec3 share = mrp_to_dcm(f.sats[j].sigma).transpose() * f.L / static_cast<double>(m);
    worst = std::max(worst, (f.sats[j].h - share).norm());
  }
  return worst;
}

Summary summarize(const ScenarioConfig& cfg, const std::vector<TelemetryFrame>& frames) {
  Summary s;
  if (frames.empty()) return s;
  const TelemetryFrame& last = frames.back();
  const int n = static_cast<int>(last.sats.size());
  if (n != cfg.n()) throw DimensionError("summarize: frame size differs from the config");
  double pos = 0.0, att = 0.0;
  for (int j = 0; j < n; ++j) {
    pos += (last.sats[j].r - cfg.target_positions[j]).squaredNorm();
    Mrp sig = last.sats[j].sigma;
    const Mrp& sd = cfg.target_attitudes[j];
    if (sig.squaredNorm() > 0.0 && (mrp_shadow(sig) - sd).squaredNorm() < (sig - sd).squaredNorm()) {
      sig = mrp_shadow(sig);
    }
    att += (sig - sd).squaredNorm();
  }
  s.pos_rms_m = std::sqrt(pos / n);
  s.att_rms_mrp = std::sqrt(att / n);
  s.rw_nonuniformity_Nms = rw_nonuniformity(last, cfg.m());
  s.L_norm_min_Nms = std::numeric_limits<double>::infinity();
  for (const TelemetryFrame& f : frames) {
    s.rw_nonuniformity_max_Nms = std::max(s.rw_nonuniformity_max_Nms, rw_nonuniformity(f, cfg.m()));
    s.L_norm_max_Nms = std::max(s.L_norm_max_Nms, f.L.norm());
    s.L_norm_min_Nms = std::min(s.L_norm_min_Nms, f.L.norm());
    s.dipole_energy_proxy += f.energy_increment;
    s.alloc_max_residual = std::max(s.alloc_max_residual, f.alloc_residual);
    if (std::isfinite(f.momentum_residual)) {
      s.momentum_residual_max = std::max(s.momentum_residual_max, f.momentum_residual);
    }
    s.alloc_restarts += f.alloc_restarts;
  }
  s.L_norm_final_Nms = last.L.norm();
  s.duration_s = last.t - frames.front().t;
  return s;
}

std::string summary_to_json(const Summary& s, const RunResult& run) {
  nlohmann::json o;
  o["scenario"] = run.meta.scenario;
  o["controller"] = run.meta.controller;
  o["mode"] = run.meta.mode;
  o["seed"] = run.meta.seed;
  o["ok"] = run.ok;
  if (!run.ok) {
    o["error"] = run.error;
    o["failed_step"] = run.failed_step;
  }
  o["steps"] = run.steps;
  o["duration_s"] = s.duration_s;
  o["pos_rms_m"] = s.pos_rms_m;
  o["att_rms_mrp"] = s.att_rms_mrp;
  o["rw_nonuniformity_Nms"] = s.rw_nonuniformity_Nms;
  o["rw_nonuniformity_max_Nms"] = s.rw_nonuniformity_max_Nms;
  o["L_norm_max_Nms"] = s.L_norm_max_Nms;
  o["L_norm_min_Nms"] = s.L_norm_min_Nms;
  o["L_norm_final_Nms"] = s.L_norm_final_Nms;
  o["dipole_energy_proxy"] = s.dipole_energy_proxy;
  o["alloc_max_residual"] = s.alloc_max_residual;
  o["momentum_residual_max"] = s.momentum_residual_max;
  o["alloc_restarts"] = s.alloc_restarts;
  return o.dump(2);
}

}  // namespace emff
