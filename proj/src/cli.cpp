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
#include "emff/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "emff/errors.hpp"
#include "emff/invariant_check.hpp"
#include "emff/runner.hpp"
#include "emff/scenario.hpp"

namespace emff {

namespace {

bool is_preset(const std::string& name) {
  const std::vector<std::string> names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

// A path to a JSON file, or a bare preset name.
ScenarioConfig resolve_config(const std::string& arg) {
  if (!std::filesystem::exists(arg) && is_preset(arg)) {
    ScenarioConfig c = preset(arg);
    c.validate();
    return c;
  }
  return load_config(arg);
}

int cmd_run(const std::string& config, const std::string& out_dir, const std::string& seed,
            const std::string& mode, const std::string& format, double duration_s,
            std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = resolve_config(config);
    if (!seed.empty()) {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(seed, &used);
      if (used != seed.size()) throw ConfigError("--seed: not an integer");
      cfg.seed = v;
    }
    if (mode == "averaged") cfg.mode = DriveMode::kAveraged;
    if (mode == "instantaneous") cfg.mode = DriveMode::kInstantaneous;
    if (duration_s > 0.0) cfg.duration_s = duration_s;
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::logic_error&) {
    err << "config error: --seed must be a non-negative integer\n";
    return kExitConfigError;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    err << "cannot create '" << out_dir << "': " << ec.message() << "\n";
    return kExitScenarioFailure;
  }
  RunResult run;
  try {
    run = run_scenario(cfg);
  } catch (const Error& e) {
    err << "scenario error: " << e.what() << "\n";
    return kExitScenarioFailure;
  }
  const std::filesystem::path dir(out_dir);
  try {
    if (format == "csv" || format == "both") {
      emit_telemetry(run.frames, run.meta, (dir / "telemetry.csv").string(), TelemetryFormat::kCsv);
    }
    if (format == "jsonl" || format == "both") {
      emit_telemetry(run.frames, run.meta, (dir / "telemetry.jsonl").string(),
                     TelemetryFormat::kJsonl);
    }
    const std::string summary = summary_to_json(summarize(cfg, run.frames), run);
    std::ofstream s(dir / "summary.json");
    s << summary << "\n";
    if (!s) throw Error("cannot write summary.json");
    out << summary << "\n";
  } catch (const Error& e) {
    err << "output error: " << e.what() << "\n";
    return kExitScenarioFailure;
  }
  if (!run.ok) {
    err << "scenario failed at " << run.error << "\n";
    return kExitScenarioFailure;
  }
  return kExitOk;
}

int cmd_validate(const std::string& config, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = resolve_config(config);
    out << "valid: " << cfg.name << " (n = " << cfg.n() << ", m = " << cfg.m()
        << ", duration " << cfg.duration() << " s)\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_presets(const std::string& dump, std::ostream& out, std::ostream& err) {
  if (!dump.empty()) {
    try {
      out << config_to_json(preset(dump)) << "\n";
      return kExitOk;
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return kExitConfigError;
    }
  }
  for (const std::string& name : preset_names()) {
    out << name << "  " << preset_description(name) << "\n";
  }
  return kExitOk;
}

int cmd_check(std::uint64_t seed, int trials, std::ostream& out) {
  bool all = true;
  for (const CheckResult& r : run_invariant_checks(seed, trials)) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    all = all && r.pass;
  }
  return all ? kExitOk : kExitScenarioFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Electromagnetic formation flight simulator", "emff"};
  app.require_subcommand(1);

  std::string run_config, out_dir = "out", seed, mode, format = "csv";
  double duration_s = 0.0;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and write telemetry and summary");
  run->add_option("config", run_config, "Config file or preset name")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the RNG seed");
  run->add_option("--mode", mode, "averaged or instantaneous")
      ->check(CLI::IsMember({"averaged", "instantaneous"}));
  run->add_option("--format", format, "csv, jsonl or both")
      ->check(CLI::IsMember({"csv", "jsonl", "both"}));
  run->add_option("--duration-s", duration_s, "Override the duration [s]");

  std::string validate_config;
  CLI::App* validate = app.add_subcommand("validate", "Load and validate a config");
  validate->add_option("config", validate_config, "Config file or preset name")->required();

  std::string dump;
  CLI::App* presets = app.add_subcommand("presets", "List built-in scenarios");
  presets->add_option("--dump", dump, "Print one preset as a config file");

  std::uint64_t check_seed = 1;
  int trials = 1000;
  CLI::App* check = app.add_subcommand("check", "Run the invariant suite on random states");
  check->add_option("--seed", check_seed, "RNG seed");
  check->add_option("--trials", trials, "Random cases per invariant")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  try {
    if (*run) return cmd_run(run_config, out_dir, seed, mode, format, duration_s, out, err);
    if (*validate) return cmd_validate(validate_config, out, err);
    if (*presets) return cmd_presets(dump, out, err);
    if (*check) return cmd_check(check_seed, trials, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitScenarioFailure;
  }
  return kExitConfigError;
}

}  // namespace emff
