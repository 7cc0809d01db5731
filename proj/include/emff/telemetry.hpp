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
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "emff/magnetics.hpp"

namespace emff {

struct SatFrame {
  Vec3 r = Vec3::Zero();      // m, I
  Vec3 v = Vec3::Zero();      // m/s, I
  Mrp sigma = Vec3::Zero();   // B relative to I
  Vec3 omega = Vec3::Zero();  // rad/s, B
  Vec3 h = Vec3::Zero();      // N m s, B
  Dipole mu_sin = Vec3::Zero();  // A m^2, I
  Dipole mu_cos = Vec3::Zero();  // A m^2, I
  Dipole mu_dc = Vec3::Zero();   // A m^2, I
  double force_cmd = 0.0;   // N, norm
  double torque_cmd = 0.0;  // N m, norm
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TelemetryFrame {
  double t = 0.0;
  std::int64_t step = 0;
  std::vector<SatFrame> sats;
  Vec3 L = Vec3::Zero();  // N m s, I
  double V = kNaN;        // Lyapunov value, proposed law only
  double V_dot = kNaN;    // -(v - v_d)^T K2 (v - v_d)
  // Maxima / sums over the control steps since the previous frame.
  double alloc_residual = 0.0;
  std::int64_t alloc_restarts = 0;
  double momentum_residual = 0.0;  // |R u_c| relative to the command scale
  double energy_increment = 0.0;   // integral of sum |mu|^2, A^2 m^4 s
  bool saturated = false;
};

struct TelemetryMeta {
  std::string scenario;
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  int record_every = 1;
  std::string mode;
  std::string controller;
};

enum class TelemetryFormat { kCsv, kJsonl };

// '#'-prefixed metadata lines, a unit-suffixed header, then one row per frame.
void write_csv(std::ostream& out, const TelemetryMeta& meta, const std::vector<TelemetryFrame>& frames);
std::vector<std::string> csv_columns(int n);
// One JSON object per frame and line.
void write_jsonl(std::ostream& out, const std::vector<TelemetryFrame>& frames);
std::string frame_to_json(const TelemetryFrame& f);
std::vector<TelemetryFrame> read_jsonl(std::istream& in);

// Throws Error on I/O failure.
void emit_telemetry(const std::vector<TelemetryFrame>& frames, const TelemetryMeta& meta,
                    const std::string& path, TelemetryFormat format);

}  // namespace emff
