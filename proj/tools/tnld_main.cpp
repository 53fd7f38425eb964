// Copyright 2026 The tnld authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tnld/cli_commands.hpp"
#include "tnld/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tnld: large-deviation statistics and conditioned trajectories of a "
               "monitored collision model, via matrix product states"};
  app.set_version_flag("--version", std::string("tnld ") + tnld::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::size_t jobs = 0;
  bool seed_set = false;
  std::uint64_t seed = 0;
  bool inject_bug = false;

  app.add_option("--config", config_path, "Run configuration file (key = value lines)");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--jobs", jobs, "Worker threads for independent grid points / trajectories");
  app.add_option("--seed", seed, "Ensemble seed (overrides sampling.seed)")
      ->each([&](const std::string&) { seed_set = true; });

  auto* scan = app.add_subcommand("scgf-scan", "SCGF, activity and rate function over an s-grid");
  auto* diagram =
      app.add_subcommand("phase-diagram", "Activity over a (V/Omega, s) grid plus s* estimates");
  auto* sample = app.add_subcommand("sample", "Sample trajectories of the unbiased dynamics");
  auto* correlator =
      app.add_subcommand("correlator", "String correlator from a previously sampled ensemble");
  auto* validate = app.add_subcommand("validate", "Dense-oracle equivalence suite at small L");
  validate->add_flag("--inject-convention-bug", inject_bug,
                     "Break the bra conjugation on purpose (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tnld::kExitConfigError;
  }

  try {
    tnld::RunConfig cfg =
        config_path.empty() ? tnld::RunConfig{} : tnld::load_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
    if (seed_set) cfg.seed = seed;

    if (scan->parsed()) return tnld::cmd_scgf_scan(cfg, std::cout);
    if (diagram->parsed()) return tnld::cmd_phase_diagram(cfg, std::cout);
    if (sample->parsed()) return tnld::cmd_sample(cfg, std::cout);
    if (correlator->parsed()) return tnld::cmd_correlator(cfg, std::cout);
    if (validate->parsed()) return tnld::cmd_validate(cfg, std::cout, inject_bug);
    return tnld::kExitConfigError;
  } catch (const tnld::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tnld::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tnld::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return tnld::kExitNumericError;
  }
}
