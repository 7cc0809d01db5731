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
#include <string>
#include <vector>

#include "emff/scenario.hpp"
#include "emff/telemetry.hpp"

namespace emff {

struct RunResult {
  TelemetryMeta meta;
  std::vector<TelemetryFrame> frames;
  SystemState final_state;
  std::int64_t steps = 0;  // control steps completed
  bool ok = true;
  std::int64_t failed_step = -1;
  std::string error;
};

// Closed loop: control, allocation, propagation over cfg.duration(). Errors
// inside the loop end the run with ok = false and the frames recorded so far,
// plus a frame for the last good state.
RunResult run_scenario(const ScenarioConfig& cfg);
RunResult run_scenario(const ScenarioConfig& cfg, const SystemState& initial);

struct Summary {
  double pos_rms_m = 0.0;
  double att_rms_mrp = 0.0;
  double rw_nonuniformity_Nms = 0.0;      // last frame
  double rw_nonuniformity_max_Nms = 0.0;  // over all frames
  double L_norm_max_Nms = 0.0;
  double L_norm_min_Nms = 0.0;
  double L_norm_final_Nms = 0.0;
  double dipole_energy_proxy = 0.0;  // A^2 m^4 s
  double alloc_max_residual = 0.0;
  double momentum_residual_max = 0.0;
  std::int64_t alloc_restarts = 0;
  double duration_s = 0.0;
};

// max over wheel satellites of |h_j - C_j^T L / m| for one frame.
double rw_nonuniformity(const TelemetryFrame& f, int m);

// Computed from the recorded frames only.
Summary summarize(const ScenarioConfig& cfg, const std::vector<TelemetryFrame>& frames);
std::string summary_to_json(const Summary& s, const RunResult& run);

}  // namespace emff
