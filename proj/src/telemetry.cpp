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
#include "emff/telemetry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "emff/errors.hpp"
#include "json.hpp"

namespace emff {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void add_vec(std::vector<std::string>* cols, const std::string& prefix, const std::string& unit) {
  for (const char* a : {"x", "y", "z"}) cols->push_back(prefix + "_" + a + unit);
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

json scalar_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Vec3 vec_from(const json& j) {
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = j.at(i).get<double>();
  return v;
}

double scalar_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

std::vector<std::string> csv_columns(int n) {
  std::vector<std::string> cols = {"t_s", "step_count"};
  add_vec(&cols, "L_I", "_Nms");
  for (const char* c : {"V_si", "V_dot_si", "alloc_residual_1", "alloc_restarts_count",
                        "momentum_residual_1", "energy_increment_A2m4s", "saturated_flag"}) {
    cols.push_back(c);
  }
  for (int j = 1; j <= n; ++j) {
    const std::string p = "s" + std::to_string(j) + "_";
    add_vec(&cols, p + "r_I", "_m");
    add_vec(&cols, p + "v_I", "_mps");
    add_vec(&cols, p + "sigma", "_mrp");
    add_vec(&cols, p + "omega_B", "_radps");
    add_vec(&cols, p + "h_B", "_Nms");
    add_vec(&cols, p + "mu_sin_I", "_Am2");
    add_vec(&cols, p + "mu_cos_I", "_Am2");
    add_vec(&cols, p + "mu_dc_I", "_Am2");
    cols.push_back(p + "force_cmd_N");
    cols.push_back(p + "torque_cmd_Nm");
  }
  return cols;
}

void write_csv(std::ostream& out, const TelemetryMeta& meta,
               const std::vector<TelemetryFrame>& frames) {
  out << "# emff telemetry, schema 1\n";
  out << "# scenario: " << meta.scenario << "\n";
  out << "# n: " << meta.n << ", m: " << meta.m << ", seed: " << meta.seed << "\n";
  out << "# dt_s: " << num(meta.dt) << ", record_every: " << meta.record_every
      << ", mode: " << meta.mode << ", controller: " << meta.controller << "\n";
  out << "# frames: I = inertial frame at the formation centre, B = satellite body frame\n";
  out << "# units: _1 dimensionless, _si the SI value of the weighted quadratic form V and its "
         "rate, _flag 0 or 1\n";
  out << "# window columns (alloc_residual, momentum_residual: max; alloc_restarts, "
         "energy_increment: sum) cover the steps since the previous row\n";
  const std::vector<std::string> cols = csv_columns(meta.n);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const TelemetryFrame& f : frames) {
    std::string row = num(f.t) + "," + std::to_string(f.step);
    auto vec = [&row](const Vec3& v) {
      for (int i = 0; i < 3; ++i) row += "," + num(v(i));
    };
    vec(f.L);
    row += "," + num(f.V) + "," + num(f.V_dot) + "," + num(f.alloc_residual) + "," +
           std::to_string(f.alloc_restarts) + "," + num(f.momentum_residual) + "," +
           num(f.energy_increment) + "," + (f.saturated ? "1" : "0");
    for (const SatFrame& s : f.sats) {
      vec(s.r);
      vec(s.v);
      vec(s.sigma);
      vec(s.omega);
      vec(s.h);
      vec(s.mu_sin);
      vec(s.mu_cos);
      vec(s.mu_dc);
      row += "," + num(s.force_cmd) + "," + num(s.torque_cmd);
    }
    out << row << "\n";
  }
}

std::string frame_to_json(const TelemetryFrame& f) {
  json o;
  o["t_s"] = f.t;
  o["step_count"] = f.step;
  o["L_I_Nms"] = vec_json(f.L);
  o["V_si"] = scalar_json(f.V);
  o["V_dot_si"] = scalar_json(f.V_dot);
  o["alloc_residual_1"] = f.alloc_residual;
  o["alloc_restarts_count"] = f.alloc_restarts;
  o["momentum_residual_1"] = f.momentum_residual;
  o["energy_increment_A2m4s"] = f.energy_increment;
  o["saturated_flag"] = f.saturated;
  json sats = json::array();
  for (const SatFrame& s : f.sats) {
    sats.push_back({{"r_I_m", vec_json(s.r)},
                    {"v_I_mps", vec_json(s.v)},
                    {"sigma_mrp", vec_json(s.sigma)},
                    {"omega_B_radps", vec_json(s.omega)},
                    {"h_B_Nms", vec_json(s.h)},
                    {"mu_sin_I_Am2", vec_json(s.mu_sin)},
                    {"mu_cos_I_Am2", vec_json(s.mu_cos)},
                    {"mu_dc_I_Am2", vec_json(s.mu_dc)},
                    {"force_cmd_N", s.force_cmd},
                    {"torque_cmd_Nm", s.torque_cmd}});
  }
  o["sats"] = sats;
  return o.dump();
}

void write_jsonl(std::ostream& out, const std::vector<TelemetryFrame>& frames) {
  for (const TelemetryFrame& f : frames) out << frame_to_json(f) << "\n";
}

std::vector<TelemetryFrame> read_jsonl(std::istream& in) {
  std::vector<TelemetryFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json o = json::parse(line);
      TelemetryFrame f;
      f.t = o.at("t_s").get<double>();
      f.step = o.at("step_count").get<std::int64_t>();
      f.L = vec_from(o.at("L_I_Nms"));
      f.V = scalar_from(o.at("V_si"));
      f.V_dot = scalar_from(o.at("V_dot_si"));
      f.alloc_residual = o.at("alloc_residual_1").get<double>();
      f.alloc_restarts = o.at("alloc_restarts_count").get<std::int64_t>();
      f.momentum_residual = o.at("momentum_residual_1").get<double>();
      f.energy_increment = o.at("energy_increment_A2m4s").get<double>();
      f.saturated = o.at("saturated_flag").get<bool>();
      for (const json& s : o.at("sats")) {
        SatFrame sf;
        sf.r = vec_from(s.at("r_I_m"));
        sf.v = vec_from(s.at("v_I_mps"));
        sf.sigma = vec_from(s.at("sigma_mrp"));
        sf.omega = vec_from(s.at("omega_B_radps"));
        sf.h = vec_from(s.at("h_B_Nms"));
        sf.mu_sin = vec_from(s.at("mu_sin_I_Am2"));
        sf.mu_cos = vec_from(s.at("mu_cos_I_Am2"));
        sf.mu_dc = vec_from(s.at("mu_dc_I_Am2"));
        sf.force_cmd = s.at("force_cmd_N").get<double>();
        sf.torque_cmd = s.at("torque_cmd_Nm").get<double>();
        f.sats.push_back(sf);
      }
      frames.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw Error("telemetry line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return frames;
}

void emit_telemetry(const std::vector<TelemetryFrame>& frames, const TelemetryMeta& meta,
                    const std::string& path, TelemetryFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  if (format == TelemetryFormat::kCsv) {
    write_csv(out, meta, frames);
  } else {
    write_jsonl(out, frames);
  }
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace emff
