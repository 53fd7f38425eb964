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

#include "tnld/mps.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <lapacke.h>

namespace tnld {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMapMat = Eigen::Map<const RowMat>;

DenseTensor from_eigen(const Eigen::MatrixXcd& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t[static_cast<std::size_t>(r) * static_cast<std::size_t>(m.cols()) +
        static_cast<std::size_t>(c)] = m(r, c);
  return t;
}

// Thin QR of the site matrix; returns (Q as tensor, R as tensor).
std::pair<DenseTensor, DenseTensor> thin_qr(const DenseTensor& m) {
  const lapack_int rows = static_cast<lapack_int>(m.extent(0));
  const lapack_int cols = static_cast<lapack_int>(m.extent(1));
  const lapack_int k = std::min(rows, cols);
  ConstMapMat mat(m.data().data(), rows, cols);
  Eigen::MatrixXcd a = mat;
  std::vector<cplx> tau(static_cast<std::size_t>(k));
  lapack_int info =
      LAPACKE_zgeqrf(LAPACK_COL_MAJOR, rows, cols, reinterpret_cast<lapack_complex_double*>(a.data()),
                     rows, reinterpret_cast<lapack_complex_double*>(tau.data()));
  if (info == 0) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(k, cols);
    for (lapack_int c = 0; c < cols; ++c)
      for (lapack_int rr = 0; rr <= std::min(c, k - 1); ++rr) r(rr, c) = a(rr, c);
    info = LAPACKE_zungqr(LAPACK_COL_MAJOR, rows, k, k,
                          reinterpret_cast<lapack_complex_double*>(a.data()), rows,
                          reinterpret_cast<lapack_complex_double*>(tau.data()));
    if (info == 0) return {from_eigen(a.leftCols(k)), from_eigen(r)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr{Eigen::MatrixXcd(mat)};
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, k);
  Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return {from_eigen(q), from_eigen(r)};
}

}  // namespace

std::vector<std::size_t> Mps::phys_dims() const {
  std::vector<std::size_t> dims(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) dims[i] = sites[i].extent(1);
  return dims;
}

std::vector<std::size_t> Mps::bond_dims() const {
  std::vector<std::size_t> bonds;
  for (std::size_t i = 0; i + 1 < sites.size(); ++i) bonds.push_back(sites[i].extent(2));
  return bonds;
}

std::size_t Mps::max_bond_dim() const {
  std::size_t m = 1;
  for (std::size_t b : bond_dims()) m = std::max(m, b);
  return m;
}

Mps Mps::product_state(const std::vector<std::vector<cplx>>& site_vectors) {
  if (site_vectors.empty()) throw std::invalid_argument("product_state: empty chain");
  Mps out;
  for (const auto& v : site_vectors) {
    out.sites.emplace_back(std::vector<std::size_t>{1, v.size(), 1}, v);
  }
  out.center = 0;
  return out;
}

void Mps::check_shapes() const {
  if (sites.empty()) throw std::invalid_argument("Mps: empty chain");
  if (sites.front().rank() != 3 || sites.front().extent(0) != 1) {
    throw std::invalid_argument("Mps: bad left boundary");
  }
  if (sites.back().extent(2) != 1) throw std::invalid_argument("Mps: bad right boundary");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].rank() != 3) throw std::invalid_argument("Mps: site tensors must be rank 3");
    if (i + 1 < sites.size() && sites[i].extent(2) != sites[i + 1].extent(0)) {
      throw std::invalid_argument("Mps: bond extents do not match");
    }
  }
}

std::size_t Mpo::max_bond_dim() const {
  std::size_t m = 1;
  for (std::size_t i = 0; i + 1 < sites.size(); ++i) m = std::max(m, sites[i].extent(3));
  return m;
}

Mpo Mpo::identity(const std::vector<std::size_t>& phys_dims) {
  Mpo out;
  for (std::size_t d : phys_dims) {
    DenseTensor site({1, d, d, 1});
    for (std::size_t p = 0; p < d; ++p) site.at({0, p, p, 0}) = 1.0;
    out.sites.push_back(std::move(site));
  }
  return out;
}

Mpo Mpo::adjoint() const {
  Mpo out;
  for (const auto& site : sites) {
    out.sites.push_back(site.permuted({0, 2, 1, 3}).conjugated());
  }
  return out;
}

void Mpo::check_shapes() const {
  if (sites.empty()) throw std::invalid_argument("Mpo: empty chain");
  if (sites.front().extent(0) != 1 || sites.back().extent(3) != 1) {
    throw std::invalid_argument("Mpo: bad boundary bonds");
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].rank() != 4) throw std::invalid_argument("Mpo: site tensors must be rank 4");
    if (i + 1 < sites.size() && sites[i].extent(3) != sites[i + 1].extent(0)) {
      throw std::invalid_argument("Mpo: bond extents do not match");
    }
  }
}

Mps apply_mpo(const Mpo& op, const Mps& state) {
  if (op.length() != state.length()) throw std::invalid_argument("apply_mpo: length mismatch");
  Mps out;
  out.log_norm = state.log_norm;
  for (std::size_t i = 0; i < state.length(); ++i) {
    if (op.phys_dim_in(i) != state.phys_dim(i)) {
      throw std::invalid_argument("apply_mpo: physical dimension mismatch");
    }
    // (l, po, r, a, b) -> (l, a, po, r, b) -> fuse bonds, MPO index slower.
    DenseTensor t = contract(op.sites[i], {2}, state.sites[i], {1});
    t = t.permuted({0, 3, 1, 2, 4});
    const auto& s = t.shape();
    out.sites.push_back(t.reshaped({s[0] * s[1], s[2], s[3] * s[4]}));
  }
  return out;
}

Mpo compose(const Mpo& a, const Mpo& b) {
  if (a.length() != b.length()) throw std::invalid_argument("compose: length mismatch");
  Mpo out;
  for (std::size_t i = 0; i < a.length(); ++i) {
    if (a.phys_dim_in(i) != b.phys_dim_out(i)) {
      throw std::invalid_argument("compose: physical dimension mismatch");
    }
    DenseTensor t = contract(a.sites[i], {2}, b.sites[i], {1});
    // (la, po, ra, lb, pi, rb) -> (la, lb, po, pi, ra, rb)
    t = t.permuted({0, 3, 1, 4, 2, 5});
    const auto& s = t.shape();
    out.sites.push_back(t.reshaped({s[0] * s[1], s[2], s[3], s[4] * s[5]}));
  }
  return out;
}

CompressResult compress(const Mps& state, std::size_t d_max, double cutoff) {
  if (d_max < 1) throw std::invalid_argument("compress: d_max must be >= 1");
  state.check_shapes();
  Mps work = state;
  const std::size_t n = work.length();

  // Orthogonalization sweep, left to right: sites 0..n-2 become left
  // isometries, the growing triangular factor is pushed into the neighbor.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& s = work.sites[i].shape();
    auto [q, r] = thin_qr(work.sites[i].reshaped({s[0] * s[1], s[2]}));
    const std::size_t k = q.extent(1);
    work.sites[i] = q.reshaped({s[0], s[1], k});
    work.sites[i + 1] = contract(r, {1}, work.sites[i + 1], {0});
  }

  // Factor the global norm out of the center so the truncation sweep sees a
  // unit-norm state and the absolute cutoff acts as a relative one.
  {
    const double nrm = work.sites[n - 1].norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      throw std::runtime_error("compress: state has zero or non-finite norm");
    }
    work.sites[n - 1].scale(1.0 / nrm);
    work.log_norm += std::log(nrm);
  }

  // Truncation sweep, right to left.
  double discarded = 0.0;
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto& s = work.sites[i].shape();
    SvdSplit split = svd_truncate(work.sites[i].reshaped({s[0], s[1] * s[2]}), d_max, cutoff);
    discarded += split.discarded_weight;
    const std::size_t k = split.singular_values.size();
    work.sites[i] = split.right_factor.reshaped({k, s[1], s[2]});
    DenseTensor carry = split.left_isometry;  // l x k
    for (std::size_t r = 0; r < carry.extent(0); ++r)
      for (std::size_t c = 0; c < k; ++c) carry[r * k + c] *= split.singular_values[c];
    work.sites[i - 1] = contract(work.sites[i - 1], {2}, carry, {0});
  }

  {
    const double nrm = work.sites[0].norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      throw std::runtime_error("compress: state truncated to zero norm");
    }
    work.sites[0].scale(1.0 / nrm);
    work.log_norm += std::log(nrm);
  }
  work.center = 0;
  return {std::move(work), discarded};
}

cplx inner(const Mps& a, const Mps& b) {
  if (a.length() != b.length()) throw std::invalid_argument("inner: length mismatch");
  for (std::size_t i = 0; i < a.length(); ++i) {
    if (a.phys_dim(i) != b.phys_dim(i)) {
      throw std::invalid_argument("inner: physical dimension mismatch");
    }
  }
  DenseTensor env({1, 1});
  env[0] = 1.0;
  for (std::size_t i = 0; i < a.length(); ++i) {
    DenseTensor t = contract(env, {0}, a.sites[i].conjugated(), {0});  // (b, p, ra)
    env = contract(t, {0, 1}, b.sites[i], {0, 1});                     // (ra, rb)
  }
  return env[0] * std::exp(a.log_norm + b.log_norm);
}

cplx trace_vectorized(const Mps& state, const std::map<std::size_t, DenseTensor>& site_ops) {
  DenseTensor env({1});
  env[0] = 1.0;
  for (std::size_t i = 0; i < state.length(); ++i) {
    const std::size_t p = state.phys_dim(i);
    const std::size_t d = static_cast<std::size_t>(std::llround(std::sqrt(double(p))));
    if (d * d != p) {
      throw std::invalid_argument("trace_vectorized: physical dimension is not a square");
    }
    DenseTensor closer({p});
    auto it = site_ops.find(i);
    if (it == site_ops.end()) {
      for (std::size_t m = 0; m < d; ++m) closer[m * d + m] = 1.0;
    } else {
      const DenseTensor& op = it->second;
      if (op.rank() != 2 || op.extent(0) != d || op.extent(1) != d) {
        throw std::invalid_argument("trace_vectorized: operator has wrong shape");
      }
      // Tr[O rho]: the fused index f = m*d + n picks up O[m, n].
      for (std::size_t f = 0; f < p; ++f) closer[f] = op[f];
    }
    DenseTensor m = contract(state.sites[i], {1}, closer, {0});  // (l, r)
    env = contract(env, {0}, m, {0});
  }
  return env[0] * std::exp(state.log_norm);
}

Mps normalize_trace(Mps state) {
  Mps flat = state;
  flat.log_norm = 0.0;
  const cplx t = trace_vectorized(flat);
  if (!(std::abs(t) > 0.0) || !std::isfinite(std::abs(t))) {
    throw std::runtime_error("normalize_trace: trace collapsed to zero");
  }
  state.sites[state.center.value_or(0)].scale(1.0 / t);
  state.log_norm = 0.0;
  return state;
}

DenseTensor mps_to_dense(const Mps& state) {
  DenseTensor acc({1, 1});
  acc[0] = 1.0;
  for (const auto& site : state.sites) {
    DenseTensor t = contract(acc, {1}, site, {0});  // (P, p, r)
    const auto& s = t.shape();
    acc = t.reshaped({s[0] * s[1], s[2]});
  }
  DenseTensor out = acc.reshaped({acc.extent(0)});
  out.scale(std::exp(state.log_norm));
  return out;
}

DenseTensor mpo_to_dense(const Mpo& op) {
  DenseTensor acc({1, 1, 1});
  acc[0] = 1.0;
  for (const auto& site : op.sites) {
    DenseTensor t = contract(acc, {2}, site, {0});  // (PO, PI, po, pi, r)
    t = t.permuted({0, 2, 1, 3, 4});
    const auto& s = t.shape();
    acc = t.reshaped({s[0] * s[1], s[2] * s[3], s[4]});
  }
  return acc.reshaped({acc.extent(0), acc.extent(1)});
}

double canonical_defect(const Mps& state) {
  if (!state.center) throw std::invalid_argument("canonical_defect: center not set");
  double worst = 0.0;
  auto gram_defect = [](const DenseTensor& m, bool left) {
    ConstMapMat mat(m.data().data(), static_cast<Eigen::Index>(m.extent(0)),
                    static_cast<Eigen::Index>(m.extent(1)));
    Eigen::MatrixXcd g = left ? Eigen::MatrixXcd(mat.adjoint() * mat)
                              : Eigen::MatrixXcd(mat * mat.adjoint());
    g -= Eigen::MatrixXcd::Identity(g.rows(), g.cols());
    return g.cwiseAbs().maxCoeff();
  };
  for (std::size_t i = 0; i < state.length(); ++i) {
    const auto& s = state.sites[i].shape();
    if (i < *state.center) {
      worst = std::max(worst, gram_defect(state.sites[i].reshaped({s[0] * s[1], s[2]}), true));
    } else if (i > *state.center) {
      worst = std::max(worst, gram_defect(state.sites[i].reshaped({s[0], s[1] * s[2]}), false));
    }
  }
  return worst;
}

}  // namespace tnld
