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
#include <vector>

#include <Eigen/Dense>

#include "tnld/mps.hpp"

namespace tnld {

/// Parameters of the monitored collision model: a chain of qubits driven by
/// a Rabi term and nearest-neighbor interactions, each site coupled for an
/// interval dt to a fresh ancilla that is then measured and reset.
struct ModelParams {
  std::size_t n_sites = 1;
  double omega = 1.0;       // Rabi frequency
  double v = 0.0;           // nearest-neighbor interaction strength
  double gamma = 3.0;       // monitoring rate
  double dt = 1.25;         // collision interval
  std::size_t n_trotter = 10;

  double coupling() const;  // sqrt(gamma / dt)
  void validate() const;
};

/// How the ancilla ket-bra pairs are closed at the end of a collision step.
struct AncillaClosure {
  enum class Mode { kTilt, kTiltDerivative, kProject, kPartialSample };
  Mode mode = Mode::kTilt;
  double s = 0.0;
  std::vector<int> outcomes;  // Project only, one bit per site

  static AncillaClosure tilt(double s) { return {Mode::kTilt, s, {}}; }
  static AncillaClosure tilt_derivative(double s) { return {Mode::kTiltDerivative, s, {}}; }
  static AncillaClosure project(std::vector<int> outcomes) {
    return {Mode::kProject, 0.0, std::move(outcomes)};
  }
  static AncillaClosure partial_sample() { return {Mode::kPartialSample, 0.0, {}}; }
};

struct TrotterLayers {
  Mpo even;         // bond gates on even bonds plus half the Rabi rotations
  Mpo odd;          // bond gates on odd bonds plus the other half
  Mpo interaction;  // product of single-site system-ancilla couplings
};

/// Layer MPOs for one Trotter substep, acting on the joint (system x ancilla)
/// ket space with a 4-dimensional physical leg per site. The Rabi term is
/// split evenly between the even and odd layers.
TrotterLayers build_trotter_layers(const ModelParams& p);

struct StepResult {
  Mps state;                     // system-only vectorized state (phys dim 4)
  double step_log_weight = 0.0;  // log of the trace ratio across the step
  double truncation_error = 0.0; // accumulated discarded weight
};

struct JointStepResult {
  Mps state;                     // joint state with open ancilla pairs (phys dim 16)
  double truncation_error = 0.0;
};

/// Test fixture hooks; the defaults give the physical channel.
struct StepDebugOptions {
  // Skips the conjugation of the bra-side layers, deliberately breaking the
  // vectorization convention (negative control for validate).
  bool skip_bra_conjugation = false;
};

/// One collision step compiled to reusable MPOs. Construction Trotterizes the
/// step unitary into n_trotter identical substep MPOs of bond dimension <= 2;
/// apply() runs them on the ket and bra sides of a vectorized state with a
/// compression after every MPO application, then closes the ancilla legs.
class CollisionStep {
 public:
  explicit CollisionStep(const ModelParams& p, const StepDebugOptions& debug = {});

  const ModelParams& params() const { return params_; }

  StepResult apply(const Mps& state, const AncillaClosure& closure, std::size_t d_max,
                   double cutoff) const;

  /// Adjoint map (left action); only the tilt closure is meaningful here.
  StepResult apply_adjoint(const Mps& state, double s, std::size_t d_max, double cutoff) const;

  /// Layer phase only: ancillas injected and evolved but left open, for the
  /// ancestral sampler.
  JointStepResult apply_layers(const Mps& state, std::size_t d_max, double cutoff) const;

 private:
  ModelParams params_;
  Mpo step_ket_;  // substep unitary on the ket side, phys dim 16
  Mpo step_bra_;  // its conjugate on the bra side
  Mpo adj_ket_;   // adjoint substep on the ket side
  Mpo adj_bra_;
};

/// Convenience wrappers matching the step contract directly.
StepResult apply_collision_step(const Mps& state, const ModelParams& p,
                                const AncillaClosure& closure, std::size_t d_max, double cutoff);

/// All 2^L Kraus operators from the exact dense step unitary (no Trotter).
std::vector<Eigen::MatrixXcd> exact_kraus_set(const ModelParams& p);
/// Kraus operators of the Trotterized step (densified layer MPOs).
std::vector<Eigen::MatrixXcd> trotter_kraus_set(const ModelParams& p);

/// Dense step unitaries on the joint space (dimension 4^L), for small L.
Eigen::MatrixXcd exact_step_unitary(const ModelParams& p);
Eigen::MatrixXcd trotter_step_unitary(const ModelParams& p);

/// Vectorized maximally mixed state (I / 2^L), bond dimension 1, trace 1.
Mps maximally_mixed_mps(std::size_t n_sites);
/// Vectorized identity operator (trace 2^L), bond dimension 1.
Mps identity_mps(std::size_t n_sites);
/// Vectorized computational product state |b1...bL><b1...bL|.
Mps basis_state_mps(const std::vector<int>& bits);

/// Closure vectors on the fused 4-dimensional ancilla leg (f = bra*2 + ket).
DenseTensor ancilla_vacuum_vector();
DenseTensor ancilla_trace_vector();
DenseTensor ancilla_project_vector(int outcome);
DenseTensor ancilla_tilt_vector(double s);

/// Close every ancilla leg of a joint state with a per-site vector.
Mps close_ancillas_with_vectors(const Mps& joint, const std::vector<DenseTensor>& vectors);

}  // namespace tnld
