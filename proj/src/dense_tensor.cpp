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

#include "tnld/dense_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <lapacke.h>

namespace tnld {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Blocked LAPACK SVD; returns false on convergence failure so the caller can
// fall back to the (slow, robust) Jacobi path.
bool lapack_svd(const Eigen::MatrixXcd& m, Eigen::MatrixXcd& u, Eigen::VectorXd& s,
                Eigen::MatrixXcd& vt) {
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Eigen::MatrixXcd work = m;
  u.resize(rows, k);
  s.resize(k);
  vt.resize(k, cols);
  const lapack_int info = LAPACKE_zgesdd(
      LAPACK_COL_MAJOR, 'S', rows, cols, reinterpret_cast<lapack_complex_double*>(work.data()),
      rows, s.data(), reinterpret_cast<lapack_complex_double*>(u.data()), rows,
      reinterpret_cast<lapack_complex_double*>(vt.data()), k);
  return info == 0;
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::vector<std::size_t> row_major_strides(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), cplx(0.0)) {
  for (std::size_t e : shape_) {
    if (e < 1) throw std::invalid_argument("DenseTensor: all extents must be >= 1");
  }
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t e : shape_) {
    if (e < 1) throw std::invalid_argument("DenseTensor: all extents must be >= 1");
  }
  if (data_.size() != shape_product(shape_)) {
    throw std::invalid_argument("DenseTensor: data length does not match shape");
  }
}

DenseTensor DenseTensor::scalar(cplx value) {
  DenseTensor t;
  t.data_[0] = value;
  return t;
}

DenseTensor DenseTensor::identity(std::size_t dim) {
  DenseTensor t({dim, dim});
  for (std::size_t i = 0; i < dim; ++i) t.data_[i * dim + i] = 1.0;
  return t;
}

std::size_t DenseTensor::extent(std::size_t leg) const {
  if (leg >= shape_.size()) throw std::invalid_argument("DenseTensor::extent: leg out of range");
  return shape_[leg];
}

std::size_t DenseTensor::flat_index(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw std::invalid_argument("DenseTensor::at: wrong index rank");
  std::size_t flat = 0;
  std::size_t leg = 0;
  for (std::size_t i : idx) {
    if (i >= shape_[leg]) throw std::out_of_range("DenseTensor::at: index out of range");
    flat = flat * shape_[leg] + i;
    ++leg;
  }
  return flat;
}

cplx& DenseTensor::at(std::initializer_list<std::size_t> idx) { return data_[flat_index(idx)]; }
cplx DenseTensor::at(std::initializer_list<std::size_t> idx) const { return data_[flat_index(idx)]; }

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> new_shape) const {
  if (shape_product(new_shape) != data_.size()) {
    throw std::invalid_argument("DenseTensor::reshaped: size mismatch");
  }
  return DenseTensor(std::move(new_shape), data_);
}

DenseTensor DenseTensor::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != shape_.size()) {
    throw std::invalid_argument("DenseTensor::permuted: order has wrong length");
  }
  std::vector<bool> seen(order.size(), false);
  bool trivial = true;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] >= order.size() || seen[order[k]]) {
      throw std::invalid_argument("DenseTensor::permuted: invalid permutation");
    }
    seen[order[k]] = true;
    if (order[k] != k) trivial = false;
  }
  if (trivial) return *this;

  const std::size_t r = rank();
  std::vector<std::size_t> new_shape(r);
  const auto old_strides = row_major_strides(shape_);
  std::vector<std::size_t> strides_in_new_order(r);
  for (std::size_t k = 0; k < r; ++k) {
    new_shape[k] = shape_[order[k]];
    strides_in_new_order[k] = old_strides[order[k]];
  }

  DenseTensor out(new_shape);
  // Odometer walk over the new index tuple; src tracks the old flat offset.
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  const std::size_t total = data_.size();
  for (std::size_t dst = 0; dst < total; ++dst) {
    out.data_[dst] = data_[src];
    for (std::size_t k = r; k-- > 0;) {
      if (++idx[k] < new_shape[k]) {
        src += strides_in_new_order[k];
        break;
      }
      src -= strides_in_new_order[k] * (new_shape[k] - 1);
      idx[k] = 0;
    }
  }
  return out;
}

DenseTensor DenseTensor::conjugated() const {
  DenseTensor out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

DenseTensor& DenseTensor::scale(cplx factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

double DenseTensor::norm() const {
  double sum = 0.0;
  for (const auto& v : data_) sum += std::norm(v);
  return std::sqrt(sum);
}

bool DenseTensor::all_finite() const {
  for (const auto& v : data_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

DenseTensor contract(const DenseTensor& a, const std::vector<std::size_t>& legs_a,
                     const DenseTensor& b, const std::vector<std::size_t>& legs_b) {
  if (legs_a.size() != legs_b.size()) {
    throw std::invalid_argument("contract: leg lists must have equal length");
  }
  auto validate = [](const DenseTensor& t, const std::vector<std::size_t>& legs) {
    std::vector<bool> used(t.rank(), false);
    for (std::size_t l : legs) {
      if (l >= t.rank() || used[l]) throw std::invalid_argument("contract: bad contraction leg");
      used[l] = true;
    }
    return used;
  };
  const auto used_a = validate(a, legs_a);
  const auto used_b = validate(b, legs_b);
  for (std::size_t i = 0; i < legs_a.size(); ++i) {
    if (a.extent(legs_a[i]) != b.extent(legs_b[i])) {
      throw std::invalid_argument("contract: extent mismatch on paired legs " +
                                  std::to_string(legs_a[i]) + "/" + std::to_string(legs_b[i]));
    }
  }

  std::vector<std::size_t> free_a, free_b;
  for (std::size_t l = 0; l < a.rank(); ++l)
    if (!used_a[l]) free_a.push_back(l);
  for (std::size_t l = 0; l < b.rank(); ++l)
    if (!used_b[l]) free_b.push_back(l);

  std::vector<std::size_t> perm_a = free_a;
  perm_a.insert(perm_a.end(), legs_a.begin(), legs_a.end());
  std::vector<std::size_t> perm_b = legs_b;
  perm_b.insert(perm_b.end(), free_b.begin(), free_b.end());

  const DenseTensor ap = a.permuted(perm_a);
  const DenseTensor bp = b.permuted(perm_b);

  std::size_t m = 1, k = 1, n = 1;
  std::vector<std::size_t> out_shape;
  for (std::size_t l : free_a) {
    m *= a.extent(l);
    out_shape.push_back(a.extent(l));
  }
  for (std::size_t l : legs_a) k *= a.extent(l);
  for (std::size_t l : free_b) {
    n *= b.extent(l);
    out_shape.push_back(b.extent(l));
  }

  DenseTensor out(out_shape);
  ConstMapMat ma(ap.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  ConstMapMat mb(bp.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  MapMat mo(out.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  mo.noalias() = ma * mb;
  return out;
}

SvdSplit svd_truncate(const DenseTensor& m, std::size_t d_max, double cutoff) {
  if (m.rank() != 2) throw std::invalid_argument("svd_truncate: rank-2 tensor required");
  if (d_max < 1) throw std::invalid_argument("svd_truncate: d_max must be >= 1");
  if (cutoff < 0.0) throw std::invalid_argument("svd_truncate: cutoff must be >= 0");
  if (!m.all_finite()) throw std::runtime_error("svd_truncate: non-finite entries");

  const std::size_t rows = m.extent(0), cols = m.extent(1);
  ConstMapMat mat(m.data().data(), static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));

  Eigen::MatrixXcd u;
  Eigen::VectorXd sv;
  Eigen::MatrixXcd vt;
  if (!lapack_svd(Eigen::MatrixXcd(mat), u, sv, vt)) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    sv = svd.singularValues();
    vt = svd.matrixV().adjoint();
  }

  const std::size_t full = static_cast<std::size_t>(sv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < full; ++i) total += sv[static_cast<Eigen::Index>(i)] * sv[static_cast<Eigen::Index>(i)];

  // Value threshold first, then the d_max cap; never drop to zero kept values.
  std::size_t keep = 0;
  while (keep < full && sv[static_cast<Eigen::Index>(keep)] >= cutoff) ++keep;
  keep = std::min(keep, d_max);
  keep = std::max<std::size_t>(keep, 1);

  double dropped = 0.0;
  for (std::size_t i = keep; i < full; ++i) dropped += sv[static_cast<Eigen::Index>(i)] * sv[static_cast<Eigen::Index>(i)];

  SvdSplit out;
  out.singular_values.assign(sv.data(), sv.data() + keep);
  out.discarded_weight = total > 0.0 ? dropped / total : 0.0;

  DenseTensor left({rows, keep});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < keep; ++c)
      left[r * keep + c] = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  DenseTensor right({keep, cols});
  for (std::size_t r = 0; r < keep; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      right[r * cols + c] = vt(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  out.left_isometry = std::move(left);
  out.right_factor = std::move(right);
  return out;
}

DenseTensor exp_hermitian(const DenseTensor& h, cplx scale) {
  if (h.rank() != 2 || h.extent(0) != h.extent(1)) {
    throw std::invalid_argument("exp_hermitian: square rank-2 tensor required");
  }
  const std::size_t d = h.extent(0);
  if (d > 16) throw std::invalid_argument("exp_hermitian: dimension must be <= 16");
  if (!h.all_finite()) throw std::runtime_error("exp_hermitian: non-finite entries");

  ConstMapMat mat(h.data().data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const double asym = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw std::invalid_argument("exp_hermitian: input is not Hermitian");

  const Eigen::MatrixXcd sym = 0.5 * (Eigen::MatrixXcd(mat) + mat.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("exp_hermitian: eigensolver failed");
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases[i] = std::exp(scale * es.eigenvalues()[i]);
  }
  const Eigen::MatrixXcd result =
      es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

  DenseTensor out({d, d});
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      out[r * d + c] = result(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return out;
}

}  // namespace tnld
