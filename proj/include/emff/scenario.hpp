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
#include <string>
#include <vector>

#include "emff/allocation.hpp"
#include "emff/controller.hpp"
#include "emff/environment.hpp"

namespace emff {

constexpr int kSchemaVersion = 1;

enum class ControllerKind { kProposed, kConventional };
enum class AllocationKind { kAcOptimal, kAcFeasibility, kDcBaseline };
// How the proposed law's command is formed for a hold of one step.
enum class HoldKind { kMidpoint, kZeroOrder };

struct InitialPerturbation {
  bool enabled = false;
  double position_m = 2.0;  // per-axis half width
  double mrp_max = 0.5;     // radius of the MRP ball
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name = "custom";
  std::vector<SatelliteConfig> sats;
  std::vector<Vec3> target_positions;   // all n, I frame
  std::vector<Mrp> target_attitudes;    // all n
  std::vector<Vec3> initial_positions;  // empty: start on the targets
  std::vector<Mrp> initial_attitudes;   // empty: start at the target attitudes
  double altitude_m = 700e3;
  double omega_f = 4.0 * kPi;
  DisturbanceModel disturbances;

  ControllerKind controller = ControllerKind::kProposed;
  HoldKind hold = HoldKind::kMidpoint;
  double k1 = 250.0;
  double k2_motion = 1250.0;
  double k2_xi = 0.005;
  BaselineGains baseline;
  double force_max = std::numeric_limits<double>::infinity();
  double torque_max = std::numeric_limits<double>::infinity();

  AllocationKind allocation = AllocationKind::kAcOptimal;
  AllocationSettings alloc;

  bool unloading = false;
  double k_dc = 0.02;

  double dt = 0.05;
  double duration_s = 0.0;  // <= 0: one orbit per `duration_orbits`
  double duration_orbits = 1.0;
  int record_every = 20;
  DriveMode mode = DriveMode::kAveraged;
  std::uint64_t seed = 0;
  InitialPerturbation perturbation;

  int n() const { return static_cast<int>(sats.size()); }
  int m() const;  // wheel satellites, which lead the list
  int chief() const;  // index of the MTQ satellite, -1 if none
  double duration() const;  // seconds
  OrbitReference orbit() const { return OrbitReference::at_altitude(altitude_m); }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Table-style cylindrical target: [rho cos(theta), rho sin(theta), z].
Vec3 cylindrical(double rho_m, double theta_deg, double z_m);

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
// Throws ConfigError for an unknown name.
ScenarioConfig preset(const std::string& name);

// JSON text or file. Unknown keys, type mismatches and failed validation
// raise ConfigError; parse errors carry the line number.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string config_to_json(const ScenarioConfig& cfg);

// Initial state from the targets plus the seeded perturbation.
SystemState initial_state(const ScenarioConfig& cfg);

}  // namespace emff
