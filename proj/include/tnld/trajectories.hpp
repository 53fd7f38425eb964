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
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "tnld/collision.hpp"
#include "tnld/mps.hpp"

namespace tnld {

/// Deterministic uniform stream; the seed fully determines every draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

/// Seed for record `index` within an ensemble; splitmix-style scramble so
/// per-record streams are independent of scheduling.
std::uint64_t derive_record_seed(std::uint64_t ensemble_seed, std::uint64_t index);

struct TrajectoryRecord {
  std::size_t n_sites = 0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> outcomes;  // T*L bits, step-major
  double log_prob = 0.0;
  std::vector<double> occupations;     // T*L conditioned <n_i> after each step
  double activity = 0.0;               // sum(outcomes) / (L*T)

  std::uint8_t outcome(std::size_t step, std::size_t site) const {
    return outcomes[step * n_sites + site];
  }
  double occupation(std::size_t step, std::size_t site) const {
    return occupations[step * n_sites + site];
  }
};

struct SampleEnsemble {
  std::vector<TrajectoryRecord> records;
  ModelParams params;
  std::uint64_t seed = 0;
  std::size_t n_steps = 0;
};

struct StepSample {
  std::vector<std::uint8_t> outcomes;  // length L
  Mps state;                           // conditioned system state, trace 1
  double log_weight = 0.0;             // sum of ln P(k_i | k_<i)
};

/// Site-by-site ancestral sampling on a joint state with open ancilla pairs
/// (the output of CollisionStep::apply_layers). Already-sampled sites carry
/// their outcome projectors, the unsampled remainder is traced out, and the
/// system legs are always traced. One step costs O(L) transfer contractions
/// through cached environments.
StepSample sample_step_outcomes(const Mps& joint_state, Rng& rng);
/// Same contractions with the outcomes dictated, for replay and enumeration.
StepSample sample_step_forced(const Mps& joint_state, const std::vector<std::uint8_t>& outcomes);

TrajectoryRecord run_trajectory(const ModelParams& p, const Mps& rho0, std::size_t n_steps,
                                std::uint64_t seed, std::size_t d_max, double cutoff);
/// Deterministic replay of a full outcome record; log_prob reports its
/// probability under the model.
TrajectoryRecord replay_trajectory(const ModelParams& p, const Mps& rho0,
                                   const std::vector<std::uint8_t>& outcomes, std::size_t n_steps,
                                   std::size_t d_max, double cutoff);

/// Independent trajectories from the stationary (maximally mixed) state.
SampleEnsemble sample_ensemble(const ModelParams& p, std::size_t n_steps, std::size_t n_samples,
                               std::uint64_t seed, std::size_t d_max, double cutoff,
                               std::size_t jobs = 1);

/// Monte Carlo estimate of the string correlator: the record-averaged
/// product of the first `len` conditioned occupations at one site.
std::vector<double> string_correlator(const SampleEnsemble& ensemble, std::size_t site,
                                      std::size_t max_len);
/// Average of the two central sites of the chain.
std::vector<double> string_correlator_central(const SampleEnsemble& ensemble, std::size_t max_len);

struct ActivityHistogram {
  std::vector<double> centers;
  std::vector<double> density;  // normalized: sum(density) * bin_width = 1
};

ActivityHistogram activity_histogram(const SampleEnsemble& ensemble, std::size_t bins);

/// Record file: header line "L T seed log_prob", then T outcome rows, then
/// T occupation rows at 6 significant digits.
void write_trajectory_file(std::ostream& os, const TrajectoryRecord& record);
TrajectoryRecord read_trajectory_file(std::istream& is);

}  // namespace tnld
