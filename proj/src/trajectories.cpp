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

#include "tnld/trajectories.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "parallel_for.hpp"

namespace tnld {

namespace {

// Combined closer on the 16-dim joint leg: system traced, ancilla contracted
// with the given 4-vector.
DenseTensor joint_closer(const DenseTensor& anc_vec) {
  DenseTensor w({16});
  const double sys_trace[4] = {1.0, 0.0, 0.0, 1.0};
  for (std::size_t f4 = 0; f4 < 4; ++f4)
    for (std::size_t a4 = 0; a4 < 4; ++a4) w[f4 * 4 + a4] = sys_trace[f4] * anc_vec[a4];
  return w;
}

DenseTensor site_matrix(const DenseTensor& site, const DenseTensor& closer) {
  return contract(site, {1}, closer, {0});  // (l, r)
}

double real_checked(const cplx& z, const char* what) {
  if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z.real()))) {
    throw std::runtime_error(std::string("sampler: ") + what + " is not real");
  }
  return z.real();
}

template <typename Decide>
StepSample sample_core(const Mps& joint, Decide&& decide) {
  const std::size_t n = joint.length();
  const DenseTensor trace_closer = joint_closer(ancilla_trace_vector());
  const DenseTensor one_closer = joint_closer(ancilla_project_vector(1));

  std::vector<DenseTensor> traced(n);
  for (std::size_t i = 0; i < n; ++i) traced[i] = site_matrix(joint.sites[i], trace_closer);

  // Right environments over traced sites; env[i] sums sites i..L-1.
  std::vector<DenseTensor> right(n + 1);
  right[n] = DenseTensor({1});
  right[n][0] = 1.0;
  for (std::size_t i = n; i-- > 0;) right[i] = contract(traced[i], {1}, right[i + 1], {0});

  DenseTensor left({1});
  left[0] = 1.0;

  StepSample out;
  out.outcomes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DenseTensor left_traced = contract(left, {0}, traced[i], {0});
    const double den = real_checked(contract(left_traced, {0}, right[i + 1], {0})[0], "marginal");
    if (!(den > 0.0) || !std::isfinite(den)) {
      throw std::runtime_error("sampler: conditional normalization collapsed");
    }
    const DenseTensor left_one = contract(left, {0}, site_matrix(joint.sites[i], one_closer), {0});
    const double num = real_checked(contract(left_one, {0}, right[i + 1], {0})[0], "marginal");
    double p1 = num / den;
    if (p1 < -1e-10 || p1 > 1.0 + 1e-10) {
      throw std::runtime_error("sampler: marginal probability outside [0, 1]");
    }
    p1 = std::min(std::max(p1, 0.0), 1.0);

    const std::uint8_t k = decide(p1, i);
    out.outcomes[i] = k;
    out.log_weight += std::log(k ? p1 : 1.0 - p1);
    left = contract(left, {0},
                    site_matrix(joint.sites[i], joint_closer(ancilla_project_vector(k))), {0});
  }

  std::vector<DenseTensor> projectors;
  projectors.reserve(n);
  for (std::uint8_t k : out.outcomes) projectors.push_back(ancilla_project_vector(k));
  out.state = normalize_trace(close_ancillas_with_vectors(joint, projectors));
  return out;
}

DenseTensor occupation_op() {
  DenseTensor n({2, 2});
  n.at({1, 1}) = 1.0;
  return n;
}

template <typename StepOutcomes>
TrajectoryRecord run_record(const ModelParams& p, const Mps& rho0, std::size_t n_steps,
                            std::uint64_t seed, std::size_t d_max, double cutoff,
                            StepOutcomes&& step_outcomes) {
  if (n_steps < 1) throw std::invalid_argument("run_trajectory: n_steps must be >= 1");
  const CollisionStep step(p);
  const std::size_t n = p.n_sites;

  TrajectoryRecord rec;
  rec.n_sites = n;
  rec.n_steps = n_steps;
  rec.seed = seed;
  rec.outcomes.resize(n * n_steps);
  rec.occupations.resize(n * n_steps);

  Mps state = normalize_trace(rho0);
  const DenseTensor n_op = occupation_op();
  for (std::size_t t = 0; t < n_steps; ++t) {
    const JointStepResult joint = step.apply_layers(state, d_max, cutoff);
    StepSample sample = step_outcomes(joint.state, t);
    rec.log_prob += sample.log_weight;
    state = normalize_trace(compress(sample.state, d_max, cutoff).state);
    for (std::size_t i = 0; i < n; ++i) {
      rec.outcomes[t * n + i] = sample.outcomes[i];
      const double occ = real_checked(trace_vectorized(state, {{i, n_op}}), "occupation");
      rec.occupations[t * n + i] = std::min(std::max(occ, 0.0), 1.0);
    }
  }
  double total = 0.0;
  for (std::uint8_t k : rec.outcomes) total += k;
  rec.activity = total / static_cast<double>(n * n_steps);
  return rec;
}

}  // namespace

std::uint64_t derive_record_seed(std::uint64_t ensemble_seed, std::uint64_t index) {
  std::uint64_t z = ensemble_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StepSample sample_step_outcomes(const Mps& joint_state, Rng& rng) {
  return sample_core(joint_state,
                     [&rng](double p1, std::size_t) { return rng.uniform() < p1 ? 1 : 0; });
}

StepSample sample_step_forced(const Mps& joint_state, const std::vector<std::uint8_t>& outcomes) {
  if (outcomes.size() != joint_state.length()) {
    throw std::invalid_argument("sample_step_forced: one outcome per site required");
  }
  return sample_core(joint_state,
                     [&outcomes](double, std::size_t i) { return outcomes[i]; });
}

TrajectoryRecord run_trajectory(const ModelParams& p, const Mps& rho0, std::size_t n_steps,
                                std::uint64_t seed, std::size_t d_max, double cutoff) {
  Rng rng(seed);
  return run_record(p, rho0, n_steps, seed, d_max, cutoff,
                    [&rng](const Mps& joint, std::size_t) { return sample_step_outcomes(joint, rng); });
}

TrajectoryRecord replay_trajectory(const ModelParams& p, const Mps& rho0,
                                   const std::vector<std::uint8_t>& outcomes, std::size_t n_steps,
                                   std::size_t d_max, double cutoff) {
  if (outcomes.size() != p.n_sites * n_steps) {
    throw std::invalid_argument("replay_trajectory: outcome record has wrong length");
  }
  return run_record(p, rho0, n_steps, 0, d_max, cutoff,
                    [&](const Mps& joint, std::size_t t) {
                      std::vector<std::uint8_t> row(outcomes.begin() + t * p.n_sites,
                                                    outcomes.begin() + (t + 1) * p.n_sites);
                      return sample_step_forced(joint, row);
                    });
}

SampleEnsemble sample_ensemble(const ModelParams& p, std::size_t n_steps, std::size_t n_samples,
                               std::uint64_t seed, std::size_t d_max, double cutoff,
                               std::size_t jobs) {
  SampleEnsemble out;
  out.params = p;
  out.seed = seed;
  out.n_steps = n_steps;
  out.records.resize(n_samples);
  detail::parallel_for(jobs, n_samples, [&](std::size_t i) {
    out.records[i] = run_trajectory(p, maximally_mixed_mps(p.n_sites), n_steps,
                                    derive_record_seed(seed, i), d_max, cutoff);
  });
  return out;
}

std::vector<double> string_correlator(const SampleEnsemble& ensemble, std::size_t site,
                                      std::size_t max_len) {
  if (ensemble.records.empty()) throw std::invalid_argument("string_correlator: empty ensemble");
  if (max_len > ensemble.n_steps || max_len < 1) {
    throw std::invalid_argument("string_correlator: max_len must be in [1, T]");
  }
  if (site >= ensemble.params.n_sites) {
    throw std::invalid_argument("string_correlator: site out of range");
  }
  std::vector<double> out(max_len, 0.0);
  for (const auto& rec : ensemble.records) {
    double prod = 1.0;
    for (std::size_t m = 0; m < max_len; ++m) {
      prod *= rec.occupation(m, site);
      out[m] += prod;
    }
  }
  for (auto& v : out) v /= static_cast<double>(ensemble.records.size());
  return out;
}

std::vector<double> string_correlator_central(const SampleEnsemble& ensemble,
                                              std::size_t max_len) {
  const std::size_t l = ensemble.params.n_sites;
  const std::size_t c1 = (l - 1) / 2, c2 = l / 2;
  std::vector<double> a = string_correlator(ensemble, c1, max_len);
  if (c2 == c1) return a;
  const std::vector<double> b = string_correlator(ensemble, c2, max_len);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * (a[i] + b[i]);
  return a;
}

ActivityHistogram activity_histogram(const SampleEnsemble& ensemble, std::size_t bins) {
  if (bins < 1) throw std::invalid_argument("activity_histogram: bins must be >= 1");
  if (ensemble.records.empty()) throw std::invalid_argument("activity_histogram: empty ensemble");
  ActivityHistogram out;
  out.centers.resize(bins);
  out.density.assign(bins, 0.0);
  const double width = 1.0 / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) out.centers[b] = (b + 0.5) * width;
  for (const auto& rec : ensemble.records) {
    std::size_t b = static_cast<std::size_t>(rec.activity * bins);
    if (b >= bins) b = bins - 1;
    out.density[b] += 1.0;
  }
  for (auto& d : out.density) d /= static_cast<double>(ensemble.records.size()) * width;
  return out;
}

void write_trajectory_file(std::ostream& os, const TrajectoryRecord& record) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", record.log_prob);
  os << record.n_sites << ' ' << record.n_steps << ' ' << record.seed << ' ' << buf << '\n';
  for (std::size_t t = 0; t < record.n_steps; ++t) {
    for (std::size_t i = 0; i < record.n_sites; ++i) {
      os << (i ? " " : "") << int(record.outcome(t, i));
    }
    os << '\n';
  }
  for (std::size_t t = 0; t < record.n_steps; ++t) {
    for (std::size_t i = 0; i < record.n_sites; ++i) {
      std::snprintf(buf, sizeof(buf), "%.6g", record.occupation(t, i));
      os << (i ? " " : "") << buf;
    }
    os << '\n';
  }
}

TrajectoryRecord read_trajectory_file(std::istream& is) {
  TrajectoryRecord rec;
  if (!(is >> rec.n_sites >> rec.n_steps >> rec.seed >> rec.log_prob)) {
    throw std::runtime_error("read_trajectory_file: bad header");
  }
  rec.outcomes.resize(rec.n_sites * rec.n_steps);
  rec.occupations.resize(rec.n_sites * rec.n_steps);
  double total = 0.0;
  for (auto& k : rec.outcomes) {
    int bit;
    if (!(is >> bit) || (bit != 0 && bit != 1)) {
      throw std::runtime_error("read_trajectory_file: bad outcome bit");
    }
    k = static_cast<std::uint8_t>(bit);
    total += bit;
  }
  for (auto& o : rec.occupations) {
    if (!(is >> o)) throw std::runtime_error("read_trajectory_file: bad occupation");
  }
  rec.activity = total / static_cast<double>(rec.n_sites * rec.n_steps);
  return rec;
}

}  // namespace tnld
