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

#include "tnld/collision.hpp"
#include "tnld/mps.hpp"

namespace tnld {

/// Whether dense reference objects are built from the exact step exponential
/// or from the densified Trotter layers. The exact mode measures Trotter plus
/// truncation error of the tensor-network route; the Trotterized mode
/// isolates truncation error alone.
enum class KrausSource { kExactExponential, kTrotterized };

/// Tilted channel as a dense matrix in the per-site-fused vectorization
/// (f = bra*2 + ket per site, site 0 most significant).
struct DenseSuperoperator {
  std::size_t n_sites = 0;
  Eigen::MatrixXcd matrix;  // 4^L x 4^L
};

DenseSuperoperator dense_tilted_superoperator(const ModelParams& p, double s,
                                              KrausSource source = KrausSource::kExactExponential);

struct DominantEig {
  double lambda = 0.0;
  Eigen::MatrixXcd rho;    // right eigenvector as an operator, trace 1
  Eigen::MatrixXcd omega;  // left eigenvector, normalized to Tr[omega^dag rho] = 1
};

DominantEig dense_dominant_eig(const DenseSuperoperator& m);

struct TrajectoryProb {
  std::vector<std::uint8_t> outcomes;  // T*L bits, step-major
  double probability = 0.0;
};

/// All 2^(L*T) measurement records with their exact probabilities.
std::vector<TrajectoryProb> enumerate_trajectory_probs(
    const ModelParams& p, const Eigen::MatrixXcd& rho0, std::size_t n_steps,
    KrausSource source = KrausSource::kExactExponential);

/// Conversions between the MPS vectorization and dense density matrices.
Eigen::MatrixXcd mps_to_density_matrix(const Mps& state);
Mps density_matrix_to_mps(const Eigen::MatrixXcd& rho);

/// vec / unvec in the module's fused convention.
Eigen::VectorXcd density_matrix_to_vec(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd vec_to_density_matrix(const Eigen::VectorXcd& v);

}  // namespace tnld
