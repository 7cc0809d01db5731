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
#include "emff/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "emff/errors.hpp"
#include "json.hpp"

namespace emff {

using nlohmann::json;

int ScenarioConfig::m() const {
  int m = 0;
  while (m < n() && sats[m].has_rw) ++m;
  return m;
}

int ScenarioConfig::chief() const {
  for (int j = 0; j < n(); ++j) {
    if (sats[j].has_mtq) return j;
  }
  return -1;
}

double ScenarioConfig::duration() const {
  if (duration_s > 0.0) return duration_s;
  return duration_orbits * orbit().period();
}

void ScenarioConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("schema_version: expected " + std::to_string(kSchemaVersion));
  }
  const int nn = n();
  if (nn < 2) throw ConfigError("satellites: need at least 2, got " + std::to_string(nn));
  for (int j = 0; j < nn; ++j) {
    try {
      sats[j].validate();
    } catch (const Error& e) {
      throw ConfigError("satellites[" + std::to_string(j) + "]: " + e.what());
    }
  }
  const int mm = m();
  if (mm < 1) throw ConfigError("satellites: m = 0, the first satellite must carry wheels");
  for (int j = mm; j < nn; ++j) {
    if (sats[j].has_rw) {
      throw ConfigError("satellites[" + std::to_string(j) +
                        "].rw: wheel satellites must lead the list");
    }
  }
  if (static_cast<int>(target_positions.size()) != nn ||
      static_cast<int>(target_attitudes.size()) != nn) {
    throw ConfigError("satellites: every satellite needs a target");
  }
  if (!initial_positions.empty() && static_cast<int>(initial_positions.size()) != nn) {
    throw ConfigError("satellites.initial: give all or none");
  }
  if (!initial_attitudes.empty() && static_cast<int>(initial_attitudes.size()) != nn) {
    throw ConfigError("satellites.initial_mrp: give all or none");
  }
  // The formation centre is the origin of I; targets must keep it there.
  Vec3 com = Vec3::Zero();
  double mass = 0.0, span = 0.0;
  for (int j = 0; j < nn; ++j) {
    com += sats[j].mass * target_positions[j];
    mass += sats[j].mass;
    span = std::max(span, target_positions[j].norm());
  }
  com /= mass;
  if (com.norm() > 1e-9 * (1.0 + span)) {
    throw ConfigError("satellites.target: mass centre of the targets is not at the origin");
  }
  const double d_min = min_separation(sats);
  for (int j = 0; j < nn; ++j) {
    for (int k = j + 1; k < nn; ++k) {
      if ((target_positions[j] - target_positions[k]).norm() < d_min) {
        throw ConfigError("satellites.target: satellites " + std::to_string(j) + " and " +
                          std::to_string(k) + " closer than the far-field limit");
      }
    }
  }
  if (!(altitude_m > 0.0)) throw ConfigError("orbit.altitude_m must be positive");
  if (!(omega_f > 0.0)) throw ConfigError("omega_f_rad_s must be positive");
  if (!(k1 > 0.0) || !(k2_motion > 0.0) || !(k2_xi > 0.0)) {
    throw ConfigError("controller gains must be positive");
  }
  if (!(force_max > 0.0) || !(torque_max > 0.0)) {
    throw ConfigError("controller limits must be positive");
  }
  if (controller == ControllerKind::kConventional) {
    if (mm != nn) throw ConfigError("controller.kind: conventional needs wheels on every satellite");
    if (allocation != AllocationKind::kDcBaseline) {
      throw ConfigError("allocation.kind: conventional control uses dc_baseline");
    }
  } else if (allocation == AllocationKind::kDcBaseline) {
    throw ConfigError("allocation.kind: dc_baseline cannot realize commanded torques");
  }
  if (!(alloc.constraint_tol > 0.0) || !(alloc.gradient_tol > 0.0) || alloc.max_outer < 1 ||
      alloc.max_inner < 1 || alloc.restarts < 1 || !(alloc.initial_penalty > 0.0)) {
    throw ConfigError("allocation: tolerances, iteration counts and penalty must be positive");
  }
  int mtq = 0;
  for (const auto& s : sats) mtq += s.has_mtq ? 1 : 0;
  if (unloading) {
    if (mtq != 1) throw ConfigError("unloading: exactly one satellite must carry the MTQ");
    if (!sats[chief()].has_rw) throw ConfigError("unloading: the MTQ satellite needs wheels");
    if (!disturbances.geomagnetic) {
      throw ConfigError("unloading: requires disturbances.geomagnetic = true");
    }
    if (!(k_dc > 0.0)) throw ConfigError("unloading.k_dc must be positive");
  }
  if (!(dt > 0.0)) throw ConfigError("simulation.dt_s must be positive");
  if (!(duration() > 0.0)) throw ConfigError("simulation duration must be positive");
  if (record_every < 1) throw ConfigError("simulation.record_every must be >= 1");
  if (perturbation.enabled && (!(perturbation.position_m >= 0.0) || !(perturbation.mrp_max >= 0.0) ||
                               perturbation.mrp_max > 1.0)) {
    throw ConfigError("initial_perturbation: position_m >= 0 and 0 <= mrp_max <= 1");
  }
}

Vec3 cylindrical(double rho_m, double theta_deg, double z_m) {
  const double th = theta_deg * kPi / 180.0;
  return Vec3(rho_m * std::cos(th), rho_m * std::sin(th), z_m);
}

namespace {

const double kThetas[4] = {105.0, 165.0, 285.0, -15.0};

ScenarioConfig five_sat(const std::string& name, const double z[4], int wheels, double omega_f) {
  ScenarioConfig c;
  c.name = name;
  c.sats.assign(5, SatelliteConfig{});
  for (int j = 0; j < 5; ++j) c.sats[j].has_rw = j < wheels;
  for (int j = 0; j < 4; ++j) c.target_positions.push_back(cylindrical(10.0, kThetas[j], z[j]));
  c.target_positions.push_back(Vec3::Zero());
  c.target_attitudes.assign(5, Mrp::Zero());
  c.omega_f = omega_f;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"maintenance_5sat", "reconfig_5sat_3rw", "unloading_5sat_mtq"};
}

std::string preset_description(const std::string& name) {
  if (name == "maintenance_5sat") {
    return "5 satellites, wheels on all, hold the formation for one orbit";
  }
  if (name == "reconfig_5sat_3rw") {
    return "5 satellites, wheels on 1-3, converge from seeded random initial states";
  }
  if (name == "unloading_5sat_mtq") {
    return "5 satellites, wheels on all, MTQ unloading on satellite 5 with k_DC = 0.02";
  }
  throw ConfigError("unknown preset '" + name + "'");
}

ScenarioConfig preset(const std::string& name) {
  const double z_sym[4] = {-2.0, 2.0, -2.0, 2.0};
  const double z_asym[4] = {-2.0, -2.0, 2.0, 2.0};
  if (name == "maintenance_5sat") return five_sat(name, z_sym, 5, 4.0 * kPi);
  if (name == "reconfig_5sat_3rw") {
    ScenarioConfig c = five_sat(name, z_sym, 3, 16.0 * kPi);
    c.perturbation.enabled = true;
    c.disturbances.geomagnetic = true;
    return c;
  }
  if (name == "unloading_5sat_mtq") {
    ScenarioConfig c = five_sat(name, z_asym, 5, 16.0 * kPi);
    c.sats[4].has_mtq = true;
    c.unloading = true;
    c.disturbances.geomagnetic = true;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key '" + (path.empty() ? "" : path + ".") + it.key() + "'");
    }
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double get_number(const json& obj, const std::string& key, const std::string& path, double def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
  return v.get<double>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path, bool def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
  return v.get<bool>();
}

std::int64_t get_int(const json& obj, const std::string& key, const std::string& path,
                     std::int64_t def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path,
                       const std::string& def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

Vec3 to_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path + ": expected an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ConfigError(path + ": expected an array of 3 numbers");
    out(i) = v[i].get<double>();
  }
  return out;
}

Mat3 to_inertia(const json& v, const std::string& path) {
  if (v.is_array() && v.size() == 3 && v[0].is_number()) return to_vec3(v, path).asDiagonal();
  if (!v.is_array() || v.size() != 3) {
    throw ConfigError(path + ": expected 3 principal moments or a 3x3 matrix");
  }
  Mat3 out;
  for (int i = 0; i < 3; ++i) out.row(i) = to_vec3(v[i], path).transpose();
  return out;
}

Vec3 to_position(const json& v, const std::string& path) {
  if (v.is_array()) return to_vec3(v, path);
  if (v.contains("xyz_m")) {
    check_keys(v, {"xyz_m"}, path);
    return to_vec3(v.at("xyz_m"), join(path, "xyz_m"));
  }
  check_keys(v, {"rho_m", "theta_deg", "z_m"}, path);
  for (const char* k : {"rho_m", "theta_deg", "z_m"}) {
    if (!v.contains(k)) throw ConfigError(join(path, k) + ": missing");
  }
  return cylindrical(get_number(v, "rho_m", path, 0), get_number(v, "theta_deg", path, 0),
                     get_number(v, "z_m", path, 0));
}

double limit_value(const json& obj, const std::string& key, const std::string& path, double def) {
  if (obj.contains(key) && obj.at(key).is_null()) return std::numeric_limits<double>::infinity();
  return get_number(obj, key, path, def);
}

json limit_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void read_satellites(const json& arr, ScenarioConfig* c) {
  if (!arr.is_array()) throw ConfigError("satellites: expected an array");
  c->sats.clear();
  c->target_positions.clear();
  c->target_attitudes.clear();
  c->initial_positions.clear();
  c->initial_attitudes.clear();
  int with_initial = 0, with_initial_mrp = 0;
  for (std::size_t j = 0; j < arr.size(); ++j) {
    const std::string p = "satellites[" + std::to_string(j) + "]";
    const json& s = arr[j];
    check_keys(s, {"mass_kg", "inertia_kgm2", "rw", "mtq", "coil_radius_m", "mu_max_Am2",
                   "rw_h_max_Nms", "target", "target_mrp", "initial", "initial_mrp"},
               p);
    SatelliteConfig sc;
    sc.mass = get_number(s, "mass_kg", p, sc.mass);
    if (s.contains("inertia_kgm2")) sc.inertia = to_inertia(s.at("inertia_kgm2"), join(p, "inertia_kgm2"));
    sc.has_rw = get_bool(s, "rw", p, sc.has_rw);
    sc.has_mtq = get_bool(s, "mtq", p, sc.has_mtq);
    sc.coil_radius = get_number(s, "coil_radius_m", p, sc.coil_radius);
    sc.mu_max = limit_value(s, "mu_max_Am2", p, sc.mu_max);
    sc.rw_h_max = limit_value(s, "rw_h_max_Nms", p, sc.rw_h_max);
    c->sats.push_back(sc);
    if (!s.contains("target")) throw ConfigError(join(p, "target") + ": missing");
    c->target_positions.push_back(to_position(s.at("target"), join(p, "target")));
    c->target_attitudes.push_back(s.contains("target_mrp")
                                      ? to_vec3(s.at("target_mrp"), join(p, "target_mrp"))
                                      : Mrp::Zero());
    if (s.contains("initial")) {
      ++with_initial;
      c->initial_positions.push_back(to_position(s.at("initial"), join(p, "initial")));
    }
    if (s.contains("initial_mrp")) {
      ++with_initial_mrp;
      c->initial_attitudes.push_back(to_vec3(s.at("initial_mrp"), join(p, "initial_mrp")));
    }
  }
  const int n = static_cast<int>(arr.size());
  if (with_initial != 0 && with_initial != n) throw ConfigError("satellites.initial: give all or none");
  if (with_initial_mrp != 0 && with_initial_mrp != n) {
    throw ConfigError("satellites.initial_mrp: give all or none");
  }
}

ControllerKind controller_kind(const std::string& s) {
  if (s == "proposed") return ControllerKind::kProposed;
  if (s == "conventional") return ControllerKind::kConventional;
  throw ConfigError("controller.kind: expected proposed or conventional, got '" + s + "'");
}

AllocationKind allocation_kind(const std::string& s) {
  if (s == "ac_optimal") return AllocationKind::kAcOptimal;
  if (s == "ac_feasibility") return AllocationKind::kAcFeasibility;
  if (s == "dc_baseline") return AllocationKind::kDcBaseline;
  throw ConfigError("allocation.kind: expected ac_optimal, ac_feasibility or dc_baseline, got '" +
                    s + "'");
}

DriveMode drive_mode(const std::string& s) {
  if (s == "averaged") return DriveMode::kAveraged;
  if (s == "instantaneous") return DriveMode::kInstantaneous;
  throw ConfigError("simulation.mode: expected averaged or instantaneous, got '" + s + "'");
}

const char* name_of(ControllerKind k) {
  return k == ControllerKind::kProposed ? "proposed" : "conventional";
}

const char* name_of(AllocationKind k) {
  switch (k) {
    case AllocationKind::kAcOptimal: return "ac_optimal";
    case AllocationKind::kAcFeasibility: return "ac_feasibility";
    case AllocationKind::kDcBaseline: return "dc_baseline";
  }
  return "ac_optimal";
}

const char* name_of(DriveMode m) {
  return m == DriveMode::kAveraged ? "averaged" : "instantaneous";
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

std::size_t line_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error at line " + std::to_string(line_of(text, e.byte)) + ": " +
                      e.what());
  }
  check_keys(root, {"schema_version", "name", "preset", "orbit", "omega_f_rad_s", "satellites",
                    "controller", "allocation", "unloading", "disturbances", "simulation",
                    "initial_perturbation"},
             "");
  if (!root.contains("schema_version")) throw ConfigError("schema_version: missing");
  ScenarioConfig c;
  if (root.contains("preset")) {
    c = preset(get_string(root, "preset", "", ""));
  }
  c.schema_version = static_cast<int>(get_int(root, "schema_version", "", kSchemaVersion));
  c.name = get_string(root, "name", "", c.name);
  if (root.contains("orbit")) {
    const json& o = root.at("orbit");
    check_keys(o, {"altitude_m"}, "orbit");
    c.altitude_m = get_number(o, "altitude_m", "orbit", c.altitude_m);
  }
  c.omega_f = get_number(root, "omega_f_rad_s", "", c.omega_f);
  if (root.contains("satellites")) read_satellites(root.at("satellites"), &c);
  if (root.contains("controller")) {
    const json& o = root.at("controller");
    const std::string p = "controller";
    check_keys(o, {"kind", "hold", "k1", "k2_motion", "k2_xi", "baseline", "force_max_N",
                   "torque_max_Nm"},
               p);
    if (o.contains("kind")) c.controller = controller_kind(get_string(o, "kind", p, ""));
    if (o.contains("hold")) {
      const std::string h = get_string(o, "hold", p, "");
      if (h == "midpoint") {
        c.hold = HoldKind::kMidpoint;
      } else if (h == "zoh") {
        c.hold = HoldKind::kZeroOrder;
      } else {
        throw ConfigError("controller.hold: expected midpoint or zoh, got '" + h + "'");
      }
    }
    c.k1 = get_number(o, "k1", p, c.k1);
    c.k2_motion = get_number(o, "k2_motion", p, c.k2_motion);
    c.k2_xi = get_number(o, "k2_xi", p, c.k2_xi);
    c.force_max = limit_value(o, "force_max_N", p, c.force_max);
    c.torque_max = limit_value(o, "torque_max_Nm", p, c.torque_max);
    if (o.contains("baseline")) {
      const json& b = o.at("baseline");
      const std::string pb = "controller.baseline";
      check_keys(b, {"lambda_p1", "lambda_p2", "lambda_a1", "lambda_a2"}, pb);
      c.baseline.lambda_p1 = get_number(b, "lambda_p1", pb, c.baseline.lambda_p1);
      c.baseline.lambda_p2 = get_number(b, "lambda_p2", pb, c.baseline.lambda_p2);
      c.baseline.lambda_a1 = get_number(b, "lambda_a1", pb, c.baseline.lambda_a1);
      c.baseline.lambda_a2 = get_number(b, "lambda_a2", pb, c.baseline.lambda_a2);
    }
  }
  if (root.contains("allocation")) {
    const json& o = root.at("allocation");
    const std::string p = "allocation";
    check_keys(o, {"kind", "constraint_tol", "gradient_tol", "max_outer", "max_inner", "restarts",
                   "initial_penalty", "multi_start_cold"},
               p);
    if (o.contains("kind")) c.allocation = allocation_kind(get_string(o, "kind", p, ""));
    c.alloc.constraint_tol = get_number(o, "constraint_tol", p, c.alloc.constraint_tol);
    c.alloc.gradient_tol = get_number(o, "gradient_tol", p, c.alloc.gradient_tol);
    c.alloc.max_outer = static_cast<int>(get_int(o, "max_outer", p, c.alloc.max_outer));
    c.alloc.max_inner = static_cast<int>(get_int(o, "max_inner", p, c.alloc.max_inner));
    c.alloc.restarts = static_cast<int>(get_int(o, "restarts", p, c.alloc.restarts));
    c.alloc.initial_penalty = get_number(o, "initial_penalty", p, c.alloc.initial_penalty);
    c.alloc.multi_start_cold = get_bool(o, "multi_start_cold", p, c.alloc.multi_start_cold);
  }
  const bool alloc_kind_given = root.contains("allocation") && root.at("allocation").contains("kind");
  if (!alloc_kind_given) {
    c.allocation = c.controller == ControllerKind::kConventional ? AllocationKind::kDcBaseline
                   : c.allocation == AllocationKind::kDcBaseline ? AllocationKind::kAcOptimal
                                                                 : c.allocation;
  }
  if (root.contains("unloading")) {
    const json& o = root.at("unloading");
    check_keys(o, {"enabled", "k_dc"}, "unloading");
    c.unloading = get_bool(o, "enabled", "unloading", c.unloading);
    c.k_dc = get_number(o, "k_dc", "unloading", c.k_dc);
  }
  if (root.contains("disturbances")) {
    const json& o = root.at("disturbances");
    const std::string p = "disturbances";
    check_keys(o, {"orbital_gravity", "gravity_gradient", "geomagnetic"}, p);
    c.disturbances.orbital_gravity = get_bool(o, "orbital_gravity", p, c.disturbances.orbital_gravity);
    c.disturbances.gravity_gradient =
        get_bool(o, "gravity_gradient", p, c.disturbances.gravity_gradient);
    c.disturbances.geomagnetic = get_bool(o, "geomagnetic", p, c.disturbances.geomagnetic);
  }
  if (root.contains("simulation")) {
    const json& o = root.at("simulation");
    const std::string p = "simulation";
    check_keys(o, {"dt_s", "duration_s", "duration_orbits", "record_every", "mode", "seed"}, p);
    c.dt = get_number(o, "dt_s", p, c.dt);
    if (o.contains("duration_s") && o.contains("duration_orbits")) {
      throw ConfigError("simulation: give duration_s or duration_orbits, not both");
    }
    if (o.contains("duration_s")) {
      c.duration_s = get_number(o, "duration_s", p, 0.0);
      if (!(c.duration_s > 0.0)) throw ConfigError("simulation.duration_s must be positive");
    }
    if (o.contains("duration_orbits")) {
      c.duration_s = 0.0;
      c.duration_orbits = get_number(o, "duration_orbits", p, c.duration_orbits);
    }
    c.record_every = static_cast<int>(get_int(o, "record_every", p, c.record_every));
    if (o.contains("mode")) c.mode = drive_mode(get_string(o, "mode", p, ""));
    const std::int64_t seed = get_int(o, "seed", p, static_cast<std::int64_t>(c.seed));
    if (seed < 0) throw ConfigError("simulation.seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  if (root.contains("initial_perturbation")) {
    const json& o = root.at("initial_perturbation");
    const std::string p = "initial_perturbation";
    check_keys(o, {"enabled", "position_m", "mrp_max"}, p);
    c.perturbation.enabled = get_bool(o, "enabled", p, c.perturbation.enabled);
    c.perturbation.position_m = get_number(o, "position_m", p, c.perturbation.position_m);
    c.perturbation.mrp_max = get_number(o, "mrp_max", p, c.perturbation.mrp_max);
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json root;
  root["schema_version"] = c.schema_version;
  root["name"] = c.name;
  root["orbit"] = {{"altitude_m", c.altitude_m}};
  root["omega_f_rad_s"] = c.omega_f;
  json sats = json::array();
  for (int j = 0; j < c.n(); ++j) {
    const SatelliteConfig& s = c.sats[j];
    json o;
    o["mass_kg"] = s.mass;
    json inertia = json::array();
    for (int i = 0; i < 3; ++i) inertia.push_back(vec_json(s.inertia.row(i).transpose()));
    o["inertia_kgm2"] = inertia;
    o["rw"] = s.has_rw;
    o["mtq"] = s.has_mtq;
    o["coil_radius_m"] = s.coil_radius;
    o["mu_max_Am2"] = limit_json(s.mu_max);
    o["rw_h_max_Nms"] = limit_json(s.rw_h_max);
    o["target"] = {{"xyz_m", vec_json(c.target_positions[j])}};
    o["target_mrp"] = vec_json(c.target_attitudes[j]);
    if (!c.initial_positions.empty()) o["initial"] = {{"xyz_m", vec_json(c.initial_positions[j])}};
    if (!c.initial_attitudes.empty()) o["initial_mrp"] = vec_json(c.initial_attitudes[j]);
    sats.push_back(o);
  }
  root["satellites"] = sats;
  root["controller"] = {{"kind", name_of(c.controller)},
                        {"hold", c.hold == HoldKind::kMidpoint ? "midpoint" : "zoh"},
                        {"k1", c.k1},
                        {"k2_motion", c.k2_motion},
                        {"k2_xi", c.k2_xi},
                        {"force_max_N", limit_json(c.force_max)},
                        {"torque_max_Nm", limit_json(c.torque_max)},
                        {"baseline",
                         {{"lambda_p1", c.baseline.lambda_p1},
                          {"lambda_p2", c.baseline.lambda_p2},
                          {"lambda_a1", c.baseline.lambda_a1},
                          {"lambda_a2", c.baseline.lambda_a2}}}};
  root["allocation"] = {{"kind", name_of(c.allocation)},
                        {"constraint_tol", c.alloc.constraint_tol},
                        {"gradient_tol", c.alloc.gradient_tol},
                        {"max_outer", c.alloc.max_outer},
                        {"max_inner", c.alloc.max_inner},
                        {"restarts", c.alloc.restarts},
                        {"initial_penalty", c.alloc.initial_penalty},
                        {"multi_start_cold", c.alloc.multi_start_cold}};
  root["unloading"] = {{"enabled", c.unloading}, {"k_dc", c.k_dc}};
  root["disturbances"] = {{"orbital_gravity", c.disturbances.orbital_gravity},
                          {"gravity_gradient", c.disturbances.gravity_gradient},
                          {"geomagnetic", c.disturbances.geomagnetic}};
  json sim = {{"dt_s", c.dt},
              {"record_every", c.record_every},
              {"mode", name_of(c.mode)},
              {"seed", c.seed}};
  if (c.duration_s > 0.0) {
    sim["duration_s"] = c.duration_s;
  } else {
    sim["duration_orbits"] = c.duration_orbits;
  }
  root["simulation"] = sim;
  root["initial_perturbation"] = {{"enabled", c.perturbation.enabled},
                                  {"position_m", c.perturbation.position_m},
                                  {"mrp_max", c.perturbation.mrp_max}};
  return root.dump(2);
}

SystemState initial_state(const ScenarioConfig& cfg) {
  cfg.validate();
  const int n = cfg.n();
  SystemState s;
  s.orbit = cfg.orbit();
  s.sats.resize(n);
  for (int j = 0; j < n; ++j) {
    s.sats[j].r = cfg.initial_positions.empty() ? cfg.target_positions[j] : cfg.initial_positions[j];
    s.sats[j].sigma = cfg.initial_attitudes.empty() ? cfg.target_attitudes[j] : cfg.initial_attitudes[j];
  }
  if (cfg.perturbation.enabled) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      0x1c0ffeeu};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec3 shift = Vec3::Zero();
    double mass = 0.0;
    for (int j = 0; j < n; ++j) {
      const Vec3 dr(u(rng), u(rng), u(rng));
      s.sats[j].r += cfg.perturbation.position_m * dr;
      Vec3 p;
      do {
        p = Vec3(u(rng), u(rng), u(rng));
      } while (p.squaredNorm() > 1.0);
      s.sats[j].sigma = mrp_shadow_switch(s.sats[j].sigma + cfg.perturbation.mrp_max * p);
      shift += cfg.sats[j].mass * cfg.perturbation.position_m * dr;
      mass += cfg.sats[j].mass;
    }
    // Keep the mass centre at the origin of I.
    shift /= mass;
    for (auto& sj : s.sats) sj.r -= shift;
  }
  return s;
}

}  // namespace emff
