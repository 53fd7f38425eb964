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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnld/collision.hpp"
#include "tnld/large_deviations.hpp"

namespace tnld {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key-value run configuration with dotted section keys. Defaults mirror
/// the reference parameter set (omega 1.0, gamma 3.0, dt 1.25, 10 Trotter
/// layers, bond dimensions 96/64).
struct RunConfig {
  ModelParams model{20, 1.0, 2.0, 3.0, 1.25, 10};
  SolverSettings solver{96, 1e-14, 1e-10, 2000, 64};

  std::vector<double> s_grid;
  std::vector<double> v_over_omega;
  std::vector<std::size_t> l_values;

  std::size_t sampling_steps = 100;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 1;
  std::vector<std::size_t> correlator_sites;
  std::size_t correlator_max_len = 0;  // 0: min(T, 30)
  std::size_t histogram_bins = 20;

  std::string out_dir = ".";
  std::size_t jobs = 1;

  // Synthetic SCGF injection for exercising the s* pipeline end to end:
  // theta_L(s) = max(-a0 s, -c) + (d / L) s.
  bool synthetic_enabled = false;
  double synthetic_a0 = 0.5;
  double synthetic_c = 0.01;
  double synthetic_d = 0.1;

  /// Sorted key=value serialization of everything that affects results
  /// (jobs and the output directory are excluded).
  std::string canonical_text() const;
  /// FNV-1a of canonical_text(), embedded in every output file.
  std::uint64_t hash() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace tnld
