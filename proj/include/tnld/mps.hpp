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

#include <map>
#include <optional>
#include <vector>

#include "tnld/dense_tensor.hpp"

namespace tnld {

// Conventions used throughout:
//  - MPS site tensors are rank-3 (left bond, physical, right bond).
//  - MPO site tensors are rank-4 (left bond, phys-out, phys-in, right bond).
//  - Boundary bonds have extent 1; adjacent bonds match.
//  - A vectorized operator carries the fused physical index f = bra*d + ket
//    (ket varying fastest); site 0 is the most significant factor when a
//    chain is flattened to a dense vector or matrix.

/// Matrix product state with an accumulated log-norm: the represented vector
/// is exp(log_norm) times the contraction of the site tensors.
struct Mps {
  std::vector<DenseTensor> sites;
  double log_norm = 0.0;
  std::optional<std::size_t> center;

  std::size_t length() const { return sites.size(); }
  std::size_t phys_dim(std::size_t i) const { return sites[i].extent(1); }
  std::vector<std::size_t> phys_dims() const;
  /// Interior bond extents, bond i sitting between sites i and i+1.
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond_dim() const;

  /// Bond-dimension-1 state from one vector per site.
  static Mps product_state(const std::vector<std::vector<cplx>>& site_vectors);

  /// Throws unless shapes are consistent (rank 3, matching bonds, boundary 1).
  void check_shapes() const;
};

struct Mpo {
  std::vector<DenseTensor> sites;

  std::size_t length() const { return sites.size(); }
  std::size_t phys_dim_out(std::size_t i) const { return sites[i].extent(1); }
  std::size_t phys_dim_in(std::size_t i) const { return sites[i].extent(2); }
  std::size_t max_bond_dim() const;

  static Mpo identity(const std::vector<std::size_t>& phys_dims);
  /// Conjugate-transpose on every physical pair (reverses the operator).
  Mpo adjoint() const;
  void check_shapes() const;
};

/// Exact MPO-times-MPS product; bond dimensions multiply, log_norm carries.
Mps apply_mpo(const Mpo& op, const Mps& state);

/// a after b as operators: (a*b)(x) = a(b(x)). Bond dimensions multiply.
Mpo compose(const Mpo& a, const Mpo& b);

struct CompressResult {
  Mps state;                     // right-canonical, center at site 0
  double truncation_error = 0.0; // accumulated discarded weight over bonds
};

/// Two-sweep compression: orthogonalization sweep, then an SVD truncation
/// sweep; the global norm is factored into log_norm.
CompressResult compress(const Mps& state, std::size_t d_max, double cutoff);

/// <a|b> including the exp(log_norm) factors of both states.
cplx inner(const Mps& a, const Mps& b);

/// Tr[(tensor product of site_ops) rho] for the operator rho vectorized by
/// `state`; sites absent from the map default to identity. Physical
/// dimensions must be perfect squares d*d with ops of shape d x d.
cplx trace_vectorized(const Mps& state, const std::map<std::size_t, DenseTensor>& site_ops = {});

/// Rescales a vectorized-operator state so its trace is exactly one and the
/// log-norm is reset to zero.
Mps normalize_trace(Mps state);

/// Full contraction to a dense vector (index of site 0 most significant).
DenseTensor mps_to_dense(const Mps& state);
/// Full contraction of an MPO chain to a dense matrix.
DenseTensor mpo_to_dense(const Mpo& op);

/// Max deviation of every site left (right) of `center` from a left (right)
/// isometry; used by tests and internal assertions.
double canonical_defect(const Mps& state);

}  // namespace tnld
