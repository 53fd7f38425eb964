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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace tnld {

using cplx = std::complex<double>;

/// Dense complex tensor with a fixed row-major linearization. Rank-0 tensors
/// (shape {}) hold a single scalar entry.
class DenseTensor {
 public:
  DenseTensor() : data_(1, cplx(0.0)) {}
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::vector<std::size_t> shape, std::vector<cplx> data);

  static DenseTensor scalar(cplx value);
  static DenseTensor identity(std::size_t dim);

  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t leg) const;
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }

  cplx& at(std::initializer_list<std::size_t> idx);
  cplx at(std::initializer_list<std::size_t> idx) const;
  cplx& operator[](std::size_t flat) { return data_[flat]; }
  cplx operator[](std::size_t flat) const { return data_[flat]; }

  /// Reinterpret with a new shape of equal total size.
  DenseTensor reshaped(std::vector<std::size_t> new_shape) const;
  /// New tensor whose leg k is the old leg order[k].
  DenseTensor permuted(const std::vector<std::size_t>& order) const;
  DenseTensor conjugated() const;
  DenseTensor& scale(cplx factor);
  double norm() const;  // Frobenius
  bool all_finite() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<cplx> data_;
  std::size_t flat_index(std::initializer_list<std::size_t> idx) const;
};

/// Pairwise contraction over the listed legs. Result legs are the unpaired
/// legs of a (in order) followed by the unpaired legs of b.
DenseTensor contract(const DenseTensor& a, const std::vector<std::size_t>& legs_a,
                     const DenseTensor& b, const std::vector<std::size_t>& legs_b);

struct SvdSplit {
  DenseTensor left_isometry;            // m x k, orthonormal columns
  std::vector<double> singular_values;  // descending, >= 0
  DenseTensor right_factor;             // k x n, orthonormal rows
  double discarded_weight = 0.0;        // sum of dropped sigma^2 over total
};

/// Truncated SVD of a rank-2 tensor. Values below cutoff are dropped first,
/// then the count is capped at d_max; at least one value is kept.
SvdSplit svd_truncate(const DenseTensor& m, std::size_t d_max, double cutoff);

/// exp(scale * h) for Hermitian h of dimension <= 16. Roundoff-level
/// asymmetry (max entry deviation <= 1e-12) is absorbed by symmetrizing.
DenseTensor exp_hermitian(const DenseTensor& h, cplx scale);

}  // namespace tnld
